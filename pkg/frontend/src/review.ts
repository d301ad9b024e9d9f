/**
 * Noisy-image review screen: one image, its reference label, and a
 * one-click Keep / Noisy(Irrelevant) / Noisy(Aesthetic) verdict. The K/I/A
 * shortcut keys dispatch through the same path as the buttons.
 */

import { ApiClient, LeaseLostError } from "./api.js";
import { KEY_BINDINGS, VerdictChoice, verdictBody } from "./requests.js";
import type { TaskView } from "./types.js";

export interface ReviewCallbacks {
  onKept(task: TaskView): void;
  onRejected(): void;
  onLeaseLost(): void;
  onError(message: string): void;
}

export function renderReview(
  root: HTMLElement,
  task: TaskView,
  client: ApiClient,
  callbacks: ReviewCallbacks,
): () => void {
  root.innerHTML = `
    <section class="review">
      <p class="prompt">
        Does this image show <strong class="ref-label"></strong>
        as an everyday photo?
      </p>
      <div class="image-frame"><img class="task-image" alt="image under review"></div>
      <div class="verdict-buttons">
        <button data-choice="KEEP">Keep <kbd>K</kbd></button>
        <button data-choice="NOISY_IRRELEVANT">Noisy: irrelevant <kbd>I</kbd></button>
        <button data-choice="NOISY_AESTHETIC">Noisy: aesthetic <kbd>A</kbd></button>
      </div>
      <p class="hint">Shortcuts: K keep, I irrelevant, A aesthetic.</p>
    </section>
  `;
  const referenceText =
    task.food_list.find((l) => l.id === task.reference_label)?.text ?? task.reference_label;
  root.querySelector<HTMLElement>(".ref-label")!.textContent = referenceText;
  root.querySelector<HTMLImageElement>(".task-image")!.src = task.image_url;

  const renderedAt = performance.now();
  let dispatched = false;

  async function submit(choice: VerdictChoice): Promise<void> {
    if (dispatched) return;
    dispatched = true;
    const body = verdictBody(choice, performance.now() - renderedAt);
    try {
      const result = await client.postVerdict(task.image_id, body);
      if (result.phase === "ANNOTATE") {
        callbacks.onKept(task);
      } else {
        callbacks.onRejected();
      }
    } catch (error) {
      if (error instanceof LeaseLostError) {
        callbacks.onLeaseLost();
      } else {
        dispatched = false;
        callbacks.onError(error instanceof Error ? error.message : String(error));
      }
    }
  }

  for (const button of root.querySelectorAll<HTMLButtonElement>(".verdict-buttons button")) {
    button.addEventListener("click", () => {
      void submit(button.dataset.choice as VerdictChoice);
    });
  }

  const onKey = (event: KeyboardEvent) => {
    const choice = KEY_BINDINGS[event.key.toLowerCase()];
    if (choice && !event.repeat && !event.ctrlKey && !event.metaKey && !event.altKey) {
      event.preventDefault();
      void submit(choice);
    }
  };
  document.addEventListener("keydown", onKey);
  return () => document.removeEventListener("keydown", onKey);
}
