/** Tutorial screen: removal criteria plus side-by-side keep/reject pairs. */

import type { TutorialDoc } from "./types.js";

export function renderTutorial(root: HTMLElement, doc: TutorialDoc, onStart: () => void): void {
  root.innerHTML = `
    <section class="tutorial">
      <h2 class="tutorial-title"></h2>
      <ul class="criteria"></ul>
      <div class="pairs"></div>
      <button class="start">Start annotating</button>
    </section>
  `;
  root.querySelector<HTMLElement>(".tutorial-title")!.textContent =
    doc.title ?? "Annotation tutorial";

  const criteria = root.querySelector<HTMLUListElement>(".criteria")!;
  for (const entry of doc.criteria ?? []) {
    const item = document.createElement("li");
    item.innerHTML = `<strong>${entry.kind}</strong>: `;
    item.append(entry.text);
    criteria.append(item);
  }

  const pairs = root.querySelector<HTMLElement>(".pairs")!;
  for (const pair of doc.pairs ?? []) {
    const row = document.createElement("div");
    row.className = "pair";
    const keep = document.createElement("div");
    keep.className = "pair-keep";
    keep.textContent = `Keep: ${pair.keep_example ?? ""}`;
    const reject = document.createElement("div");
    reject.className = "pair-reject";
    reject.textContent = `Reject (${pair.kind}): ${pair.reject_example ?? ""}`;
    row.append(keep, reject);
    pairs.append(row);
  }

  root.querySelector<HTMLButtonElement>(".start")!.addEventListener("click", onStart);
}
