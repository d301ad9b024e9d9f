import { describe, expect, it } from "vitest";

import { dragToBox, MIN_DRAG_PX, round4, toNormalized, toViewport } from "../src/coords.js";

const VIEW = { width: 800, height: 600 };

describe("drag to normalized box", () => {
  it("maps the reference drag on an 800x600 viewport", () => {
    const box = dragToBox(100, 50, 300, 250, VIEW);
    expect(box).not.toBeNull();
    expect(box!.x).toBeCloseTo(0.125, 4);
    expect(box!.y).toBeCloseTo(0.0833, 4);
    expect(box!.w).toBeCloseTo(0.25, 4);
    expect(box!.h).toBeCloseTo(0.3333, 4);
  });

  it("accepts drags in any direction", () => {
    const forward = dragToBox(100, 50, 300, 250, VIEW);
    const backward = dragToBox(300, 250, 100, 50, VIEW);
    expect(backward).toEqual(forward);
  });

  it("discards drags under the pixel floor", () => {
    expect(dragToBox(100, 100, 102, 250, VIEW)).toBeNull(); // 2 px wide
    expect(dragToBox(100, 100, 250, 102, VIEW)).toBeNull(); // 2 px tall
    expect(dragToBox(10, 10, 10, 10, VIEW)).toBeNull(); // click
    expect(dragToBox(100, 100, 100 + MIN_DRAG_PX, 100 + MIN_DRAG_PX, VIEW)).not.toBeNull();
  });

  it("clamps drags that leave the image", () => {
    const box = dragToBox(700, 500, 900, 700, VIEW);
    expect(box).not.toBeNull();
    expect(box!.x + box!.w).toBeLessThanOrEqual(1);
    expect(box!.y + box!.h).toBeLessThanOrEqual(1);
  });
});

describe("round trip", () => {
  it("normalize(denormalize(b)) = b to 4 decimals on arbitrary viewports", () => {
    const views = [
      { width: 800, height: 600 },
      { width: 1024, height: 768 },
      { width: 333, height: 777 },
      { width: 1920, height: 1080 },
    ];
    let seed = 42;
    const next = () => {
      seed = (seed * 1103515245 + 12345) % 2147483648;
      return seed / 2147483648;
    };
    for (const view of views) {
      for (let i = 0; i < 250; i++) {
        const box = {
          x: round4(next() * 0.6),
          y: round4(next() * 0.6),
          w: round4(0.01 + next() * 0.35),
          h: round4(0.01 + next() * 0.35),
        };
        const roundTripped = toNormalized(toViewport(box, view), view);
        expect(roundTripped).toEqual(box);
      }
    }
  });
});
