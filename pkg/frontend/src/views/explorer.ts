// Clause explorer tab: search the clause index and inspect raw vs adjusted
// scores, so users can see what grounded their draft (and how feedback moved
// the ranking). All numbers come straight off the wire.

import type { GatewayClient } from "../api.js";
import type { ClauseHit } from "../types.js";

export interface ExplorerHandles {
  root: HTMLElement;
  search(query: string): Promise<ClauseHit[]>;
}

export function createExplorer(client: GatewayClient): ExplorerHandles {
  const root = document.createElement("div");
  root.className = "clause-explorer";

  const form = document.createElement("form");
  const input = document.createElement("input");
  input.type = "search";
  input.placeholder = "Search the clause library";
  const go = document.createElement("button");
  go.type = "submit";
  go.textContent = "Search";
  form.append(input, go);

  const results = document.createElement("table");
  results.className = "explorer-results";
  root.append(form, results);

  async function search(query: string): Promise<ClauseHit[]> {
    const hits = await client.searchClauses(query, 10, 0);
    results.replaceChildren();
    const head = document.createElement("tr");
    for (const column of ["clause", "raw", "adjusted", "text"]) {
      const th = document.createElement("th");
      th.textContent = column;
      head.append(th);
    }
    results.append(head);
    for (const hit of hits) {
      const row = document.createElement("tr");
      row.dataset.clauseId = hit.clause_id;
      const cells = [
        hit.clause_id,
        hit.raw_score.toFixed(6),
        hit.adjusted_score.toFixed(6),
        hit.text,
      ];
      for (const [i, value] of cells.entries()) {
        const td = document.createElement("td");
        td.className = ["clause-id", "raw-score", "adjusted-score", "clause-text"][i];
        td.textContent = value;
        row.append(td);
      }
      results.append(row);
    }
    return hits;
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void search(input.value);
  });

  return { root, search };
}
