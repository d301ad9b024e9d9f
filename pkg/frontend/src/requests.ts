/**
 * Request-body builders shared by every input path.
 *
 * Keyboard shortcuts and buttons both funnel through a VerdictChoice, so
 * the two paths produce byte-identical request bodies by construction.
 */

import { dragToBox, ViewSize } from "./coords.js";
import type { BoxPayload, VerdictPayload } from "./types.js";

export type VerdictChoice = "KEEP" | "NOISY_IRRELEVANT" | "NOISY_AESTHETIC";

/** Review-screen shortcut keys (lowercased `KeyboardEvent.key`). */
export const KEY_BINDINGS: Readonly<Record<string, VerdictChoice>> = {
  k: "KEEP",
  i: "NOISY_IRRELEVANT",
  a: "NOISY_AESTHETIC",
};

export function verdictBody(choice: VerdictChoice, elapsedMs: number): VerdictPayload {
  const elapsed_ms = Math.max(0, Math.round(elapsedMs));
  switch (choice) {
    case "KEEP":
      return { decision: "KEEP", elapsed_ms };
    case "NOISY_IRRELEVANT":
      return { decision: "NOISY", noisy_reason: "IRRELEVANT", elapsed_ms };
    case "NOISY_AESTHETIC":
      return { decision: "NOISY", noisy_reason: "AESTHETIC", elapsed_ms };
  }
}

export function boxBody(box: BoxPayload, labelId?: string): BoxPayload {
  const body: BoxPayload = { x: box.x, y: box.y, w: box.w, h: box.h };
  if (labelId !== undefined) {
    body.label_id = labelId;
  }
  return body;
}

/**
 * Turn a completed drag into the box request body, or null when the drag
 * is degenerate and no request must be sent. The label is omitted when the
 * selector still sits on the reference label; the server applies it.
 */
export function dragRequest(
  startX: number,
  startY: number,
  endX: number,
  endY: number,
  view: ViewSize,
  selectedLabel: string,
  referenceLabel: string,
): BoxPayload | null {
  const box = dragToBox(startX, startY, endX, endY, view);
  if (box === null) {
    return null;
  }
  return boxBody(box, selectedLabel === referenceLabel ? undefined : selectedLabel);
}
