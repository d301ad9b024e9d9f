/** Progress panel: per-label counts and the reviewer's pace against the
 * one-second-per-rejection benchmark. */

import type { StatsResponse } from "./types.js";

export function renderProgress(root: HTMLElement, stats: StatsResponse): void {
  const median =
    stats.review.median_ms === null
      ? "no verdicts yet"
      : `${(stats.review.median_ms / 1000).toFixed(2)} s (benchmark ~1 s per removal)`;
  root.innerHTML = `
    <section class="progress">
      <h2>Progress</h2>
      <p>Images uploaded: <strong>${stats.total_images}</strong>,
         boxes drawn: <strong>${stats.total_boxes}</strong></p>
      <p>Median verdict time: ${median}</p>
      <table>
        <thead><tr><th>Food Label</th><th>Food Image Count</th><th>Bounding Box Count</th></tr></thead>
        <tbody></tbody>
      </table>
    </section>
  `;
  const body = root.querySelector<HTMLTableSectionElement>("tbody")!;
  for (const row of stats.rows) {
    const tr = document.createElement("tr");
    for (const value of [row.label_text, String(row.image_count), String(row.box_count)]) {
      const td = document.createElement("td");
      td.textContent = value;
      tr.append(td);
    }
    body.append(tr);
  }
}
