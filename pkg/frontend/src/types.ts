export interface FoodLabel {
  id: string;
  text: string;
}

export interface ExistingBox {
  box_id: string;
  x: number;
  y: number;
  w: number;
  h: number;
  label_id: string;
}

export type TaskPhase = "REVIEW" | "ANNOTATE";

export interface TaskView {
  image_id: string;
  image_url: string;
  width_px: number;
  height_px: number;
  reference_label: string;
  food_list: FoodLabel[];
  existing_boxes: ExistingBox[];
  phase: TaskPhase;
  lease_expires_at: string | null;
}

export interface VerdictPayload {
  decision: "KEEP" | "NOISY";
  noisy_reason?: "IRRELEVANT" | "AESTHETIC";
  elapsed_ms: number;
}

export interface BoxPayload {
  x: number;
  y: number;
  w: number;
  h: number;
  label_id?: string;
}

export interface CreatedBox {
  box_id: string;
  label_id: string;
  crop: { x_px: number; y_px: number; w_px: number; h_px: number };
}

export interface StatsRow {
  label_id: string;
  label_text: string;
  image_count: number;
  box_count: number;
}

export interface StatsResponse {
  rows: StatsRow[];
  total_images: number;
  total_boxes: number;
  review: { count: number; median_ms: number | null };
}

export interface TutorialPair {
  kind: string;
  keep_example?: string;
  reject_example?: string;
}

export interface TutorialDoc {
  title?: string;
  criteria?: { kind: string; text: string }[];
  pairs?: TutorialPair[];
  shortcuts?: Record<string, string>;
}
