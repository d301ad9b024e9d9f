/**
 * Bounding-box editor: click-and-drag on the image creates a box with the
 * selected label (defaulting to the reference label); each saved box shows
 * as a cropped thumbnail below the image, with its label and a delete
 * button, so the annotator can verify or remove it before pressing Done.
 */

import { ApiClient, ApiError, LeaseLostError } from "./api.js";
import { toViewport } from "./coords.js";
import { dragRequest } from "./requests.js";
import type { ExistingBox, TaskView } from "./types.js";

export interface EditorCallbacks {
  onDone(): void;
  onLeaseLost(): void;
}

const CROP_HEIGHT = 90;

export function renderEditor(
  root: HTMLElement,
  task: TaskView,
  client: ApiClient,
  callbacks: EditorCallbacks,
): () => void {
  root.innerHTML = `
    <section class="editor">
      <p class="prompt">
        Drag a box around every <strong class="ref-label"></strong>
        (or other listed food). Label for new boxes:
        <select class="label-select"></select>
      </p>
      <div class="image-frame annotate">
        <img class="task-image" alt="image to annotate" draggable="false">
        <div class="drag-preview" hidden></div>
        <div class="box-layer"></div>
      </div>
      <p class="error" role="alert" hidden></p>
      <h3>Saved boxes</h3>
      <ul class="crop-strip"></ul>
      <button class="done">Done with this image</button>
    </section>
  `;
  const referenceText =
    task.food_list.find((l) => l.id === task.reference_label)?.text ?? task.reference_label;
  root.querySelector<HTMLElement>(".ref-label")!.textContent = referenceText;

  const image = root.querySelector<HTMLImageElement>(".task-image")!;
  const frame = root.querySelector<HTMLElement>(".image-frame")!;
  const preview = root.querySelector<HTMLElement>(".drag-preview")!;
  const boxLayer = root.querySelector<HTMLElement>(".box-layer")!;
  const strip = root.querySelector<HTMLUListElement>(".crop-strip")!;
  const errorLine = root.querySelector<HTMLElement>(".error")!;
  const select = root.querySelector<HTMLSelectElement>(".label-select")!;

  for (const label of task.food_list) {
    const option = document.createElement("option");
    option.value = label.id;
    option.textContent = label.text;
    option.selected = label.id === task.reference_label;
    select.append(option);
  }

  image.src = task.image_url;

  function showError(message: string): void {
    errorLine.textContent = message;
    errorLine.hidden = false;
  }

  function clearError(): void {
    errorLine.hidden = true;
  }

  function labelText(labelId: string): string {
    return task.food_list.find((l) => l.id === labelId)?.text ?? labelId;
  }

  function renderOutline(box: ExistingBox): void {
    const view = { width: image.clientWidth, height: image.clientHeight };
    const rect = toViewport(box, view);
    const el = document.createElement("div");
    el.className = "box-outline";
    el.dataset.boxId = box.box_id;
    el.style.left = `${rect.left}px`;
    el.style.top = `${rect.top}px`;
    el.style.width = `${rect.width}px`;
    el.style.height = `${rect.height}px`;
    boxLayer.append(el);
  }

  function addCrop(box: ExistingBox): void {
    const item = document.createElement("li");
    item.dataset.boxId = box.box_id;
    const canvas = document.createElement("canvas");
    const sx = box.x * task.width_px;
    const sy = box.y * task.height_px;
    const sw = Math.max(1, box.w * task.width_px);
    const sh = Math.max(1, box.h * task.height_px);
    canvas.height = CROP_HEIGHT;
    canvas.width = Math.max(24, Math.round((sw / sh) * CROP_HEIGHT));
    const draw = () => {
      const ctx = canvas.getContext("2d");
      if (ctx) ctx.drawImage(image, sx, sy, sw, sh, 0, 0, canvas.width, canvas.height);
    };
    if (image.complete) draw();
    else image.addEventListener("load", draw, { once: true });

    const caption = document.createElement("span");
    caption.textContent = labelText(box.label_id);
    const remove = document.createElement("button");
    remove.textContent = "Delete";
    remove.addEventListener("click", () => {
      void (async () => {
        try {
          await client.deleteBox(box.box_id);
          item.remove();
          boxLayer.querySelector(`[data-box-id="${box.box_id}"]`)?.remove();
          clearError();
        } catch (error) {
          if (error instanceof LeaseLostError) callbacks.onLeaseLost();
          else showError(error instanceof Error ? error.message : String(error));
        }
      })();
    });
    item.append(canvas, caption, remove);
    strip.append(item);
  }

  for (const box of task.existing_boxes) {
    addCrop(box);
    renderOutline(box);
  }

  let dragStart: { x: number; y: number } | null = null;

  function framePoint(event: PointerEvent): { x: number; y: number } {
    const bounds = image.getBoundingClientRect();
    return { x: event.clientX - bounds.left, y: event.clientY - bounds.top };
  }

  const onPointerDown = (event: PointerEvent) => {
    if (event.button !== 0) return;
    dragStart = framePoint(event);
    frame.setPointerCapture(event.pointerId);
  };

  const onPointerMove = (event: PointerEvent) => {
    if (!dragStart) return;
    const point = framePoint(event);
    preview.hidden = false;
    preview.style.left = `${Math.min(dragStart.x, point.x)}px`;
    preview.style.top = `${Math.min(dragStart.y, point.y)}px`;
    preview.style.width = `${Math.abs(point.x - dragStart.x)}px`;
    preview.style.height = `${Math.abs(point.y - dragStart.y)}px`;
  };

  const onPointerUp = (event: PointerEvent) => {
    if (!dragStart) return;
    const start = dragStart;
    dragStart = null;
    preview.hidden = true;
    const point = framePoint(event);
    const view = { width: image.clientWidth, height: image.clientHeight };
    const body = dragRequest(
      start.x, start.y, point.x, point.y, view, select.value, task.reference_label,
    );
    if (body === null) return; // degenerate drag, no request
    void (async () => {
      try {
        const created = await client.postBox(task.image_id, body);
        clearError();
        const existing: ExistingBox = {
          box_id: created.box_id,
          label_id: created.label_id,
          x: body.x,
          y: body.y,
          w: body.w,
          h: body.h,
        };
        addCrop(existing);
        renderOutline(existing);
      } catch (error) {
        if (error instanceof LeaseLostError) callbacks.onLeaseLost();
        else if (error instanceof ApiError) showError(error.message);
        else showError(String(error));
      }
    })();
  };

  frame.addEventListener("pointerdown", onPointerDown);
  frame.addEventListener("pointermove", onPointerMove);
  frame.addEventListener("pointerup", onPointerUp);

  root.querySelector<HTMLButtonElement>(".done")!.addEventListener("click", () => {
    void (async () => {
      try {
        await client.postDone(task.image_id);
        callbacks.onDone();
      } catch (error) {
        if (error instanceof LeaseLostError) callbacks.onLeaseLost();
        else showError(error instanceof Error ? error.message : String(error));
      }
    })();
  });

  return () => {
    frame.removeEventListener("pointerdown", onPointerDown);
    frame.removeEventListener("pointermove", onPointerMove);
    frame.removeEventListener("pointerup", onPointerUp);
  };
}
