/** Thin fetch wrapper for the annotation service API. */

import type {
  BoxPayload,
  CreatedBox,
  StatsResponse,
  TaskView,
  TutorialDoc,
  VerdictPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

/** 409 from the server: our lease is gone (expired or stolen work). */
export class LeaseLostError extends ApiError {}

async function raise(response: Response): Promise<never> {
  let detail = `${response.status}`;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  if (response.status === 409) {
    throw new LeaseLostError(409, detail);
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    readonly worker: string,
    readonly base: string = "",
  ) {}

  private url(path: string): string {
    const sep = path.includes("?") ? "&" : "?";
    return `${this.base}${path}${sep}worker=${encodeURIComponent(this.worker)}`;
  }

  async nextTask(): Promise<TaskView | null> {
    const response = await fetch(this.url("/api/tasks/next"));
    if (response.status === 204) return null;
    if (!response.ok) await raise(response);
    return (await response.json()) as TaskView;
  }

  async postVerdict(imageId: string, body: VerdictPayload): Promise<{ phase: string | null }> {
    const response = await fetch(this.url(`/api/images/${imageId}/verdict`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await raise(response);
    return (await response.json()) as { phase: string | null };
  }

  async postBox(imageId: string, body: BoxPayload): Promise<CreatedBox> {
    const response = await fetch(this.url(`/api/images/${imageId}/boxes`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await raise(response);
    return (await response.json()) as CreatedBox;
  }

  async deleteBox(boxId: string): Promise<void> {
    const response = await fetch(this.url(`/api/boxes/${boxId}`), { method: "DELETE" });
    if (!response.ok) await raise(response);
  }

  async postDone(imageId: string): Promise<void> {
    const response = await fetch(this.url(`/api/images/${imageId}/done`), { method: "POST" });
    if (!response.ok) await raise(response);
  }

  async stats(): Promise<StatsResponse> {
    const response = await fetch("/api/stats");
    if (!response.ok) await raise(response);
    return (await response.json()) as StatsResponse;
  }

  async tutorial(): Promise<TutorialDoc> {
    const response = await fetch("/api/tutorial");
    if (!response.ok) await raise(response);
    return (await response.json()) as TutorialDoc;
  }
}
