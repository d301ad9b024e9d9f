/**
 * Viewport <-> normalized coordinate mapping.
 *
 * The server speaks normalized [0,1] rectangles; the browser works in the
 * rendered image's client pixels. Normalized values are rounded to four
 * decimal places, which makes the round trip lossless for any viewport
 * size at that precision.
 */

import type { BoxPayload } from "./types.js";

/** Drags smaller than this (in client px, either dimension) are discarded. */
export const MIN_DRAG_PX = 3;

export interface ViewSize {
  width: number;
  height: number;
}

export interface RectPx {
  left: number;
  top: number;
  width: number;
  height: number;
}

export function round4(value: number): number {
  return Math.round(value * 10000) / 10000;
}

export function toNormalized(rect: RectPx, view: ViewSize): BoxPayload {
  return {
    x: round4(rect.left / view.width),
    y: round4(rect.top / view.height),
    w: round4(rect.width / view.width),
    h: round4(rect.height / view.height),
  };
}

export function toViewport(box: BoxPayload, view: ViewSize): RectPx {
  return {
    left: box.x * view.width,
    top: box.y * view.height,
    width: box.w * view.width,
    height: box.h * view.height,
  };
}

/**
 * Convert a completed drag gesture into a normalized box.
 *
 * Returns null for degenerate drags (< MIN_DRAG_PX in either dimension);
 * the caller must not issue a request in that case. Coordinates are
 * clamped to the visible image so a drag that leaves the element still
 * produces a legal box.
 */
export function dragToBox(
  startX: number,
  startY: number,
  endX: number,
  endY: number,
  view: ViewSize,
): BoxPayload | null {
  const clamp = (v: number, hi: number) => Math.min(Math.max(v, 0), hi);
  const x0 = clamp(Math.min(startX, endX), view.width);
  const x1 = clamp(Math.max(startX, endX), view.width);
  const y0 = clamp(Math.min(startY, endY), view.height);
  const y1 = clamp(Math.max(startY, endY), view.height);
  if (x1 - x0 < MIN_DRAG_PX || y1 - y0 < MIN_DRAG_PX) {
    return null;
  }
  return toNormalized({ left: x0, top: y0, width: x1 - x0, height: y1 - y0 }, view);
}
