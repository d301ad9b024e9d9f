/** App shell: tutorial on first visit, then the review/annotate task loop. */

import { ApiClient } from "./api.js";
import { renderEditor } from "./editor.js";
import { renderProgress } from "./progress.js";
import { renderReview } from "./review.js";
import { renderTutorial } from "./tutorial.js";

const WORKER_KEY = "foodharvest.worker";

function workerId(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("worker");
  if (fromQuery) {
    localStorage.setItem(WORKER_KEY, fromQuery);
    return fromQuery;
  }
  const stored = localStorage.getItem(WORKER_KEY);
  if (stored) return stored;
  const generated = `worker-${Math.random().toString(36).slice(2, 8)}`;
  localStorage.setItem(WORKER_KEY, generated);
  return generated;
}

const client = new ApiClient(workerId());
const screen = document.getElementById("screen")!;
let teardown: (() => void) | null = null;

function swap(render: (root: HTMLElement) => (() => void) | void): void {
  if (teardown) teardown();
  teardown = render(screen) ?? null;
}

function showMessage(text: string, retryLabel: string, retry: () => void): void {
  swap((root) => {
    root.innerHTML = `<section class="message"><p></p><button></button></section>`;
    root.querySelector("p")!.textContent = text;
    const button = root.querySelector("button")!;
    button.textContent = retryLabel;
    button.addEventListener("click", retry);
  });
}

async function loadNextTask(): Promise<void> {
  let task;
  try {
    task = await client.nextTask();
  } catch (error) {
    showMessage(`Could not reach the service: ${error}`, "Retry", () => void loadNextTask());
    return;
  }
  if (task === null) {
    showMessage("No images are waiting for you right now.", "Check again", () =>
      void loadNextTask(),
    );
    return;
  }
  if (task.phase === "REVIEW") {
    swap((root) =>
      renderReview(root, task, client, {
        onKept: () => void loadNextTask(), // same image comes back in ANNOTATE phase
        onRejected: () => void loadNextTask(),
        onLeaseLost: () => void loadNextTask(),
        onError: (message) => showMessage(message, "Continue", () => void loadNextTask()),
      }),
    );
  } else {
    swap((root) =>
      renderEditor(root, task, client, {
        onDone: () => void loadNextTask(),
        onLeaseLost: () => void loadNextTask(),
      }),
    );
  }
}

async function showTutorial(): Promise<void> {
  const doc = await client.tutorial().catch(() => ({ title: "Tutorial unavailable" }));
  swap((root) => renderTutorial(root, doc, () => void loadNextTask()));
}

async function showProgress(): Promise<void> {
  try {
    const stats = await client.stats();
    swap((root) => {
      renderProgress(root, stats);
      const back = document.createElement("button");
      back.textContent = "Back to tasks";
      back.addEventListener("click", () => void loadNextTask());
      root.querySelector(".progress")!.append(back);
    });
  } catch (error) {
    showMessage(`Stats unavailable: ${error}`, "Back", () => void loadNextTask());
  }
}

document.getElementById("nav-tutorial")!.addEventListener("click", () => void showTutorial());
document.getElementById("nav-progress")!.addEventListener("click", () => void showProgress());
document.getElementById("worker-tag")!.textContent = client.worker;

void showTutorial();
