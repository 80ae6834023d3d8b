import { AdjudicationView, DashboardView, QueueView } from "./state.js";
import { SessionSummary } from "./types.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function countsBar(session: SessionSummary): string {
  const c = session.counts;
  return (
    `<ul class="counts">` +
    `<li data-count="pending">pending: ${c.pending}</li>` +
    `<li data-count="awaiting_second">awaiting second: ${c.awaiting_second}</li>` +
    `<li data-count="disagreement">disagreement: ${c.disagreement}</li>` +
    `<li data-count="final">final: ${c.final}</li>` +
    `</ul>`
  );
}

function toast(message: string | null): string {
  return message ? `<p class="toast">${escapeHtml(message)}</p>` : "";
}

export function renderQueue(view: QueueView): string {
  const head =
    `<h1>Queue — ${escapeHtml(view.annotator)}</h1>` +
    countsBar(view.session) +
    toast(view.toast);
  if (view.current === null) {
    return (
      head +
      `<p class="done">No tasks left for you. ` +
      `<a href="#/dashboard">View the dashboard</a>.</p>`
    );
  }
  const disabled = view.submitting ? " disabled" : "";
  const buttons = view.session.labels
    .map(
      (label) =>
        `<button data-label="${escapeHtml(label)}"${disabled}>` +
        `${escapeHtml(label)}</button>`,
    )
    .join("");
  // only the annotator's own label can be present in a redacted payload;
  // render it (if any) and nothing else
  const own = view.current.labels[view.annotator];
  const ownLine = own
    ? `<p class="own-label">your label: ${escapeHtml(own)}</p>`
    : "";
  return (
    head +
    `<article class="task" data-task="${escapeHtml(view.current.task_id)}">` +
    `<p class="text">${escapeHtml(view.current.text)}</p>` +
    ownLine +
    `<div class="controls">${buttons}</div>` +
    `</article>`
  );
}

export function renderAdjudication(view: AdjudicationView): string {
  const head =
    `<h1>Adjudication</h1>` + countsBar(view.session) + toast(view.toast);
  if (view.tasks.length === 0) {
    return head + `<p class="done">No disagreements to resolve.</p>`;
  }
  const cards = view.tasks
    .map((task) => {
      const labels = Object.entries(task.labels)
        .map(
          ([who, label]) =>
            `<li>${escapeHtml(who)}: ${escapeHtml(label)}</li>`,
        )
        .join("");
      const options = view.session.labels
        .map((l) => `<option value="${escapeHtml(l)}">${escapeHtml(l)}</option>`)
        .join("");
      return (
        `<article class="task" data-task="${escapeHtml(task.task_id)}">` +
        `<p class="text">${escapeHtml(task.text)}</p>` +
        `<ul class="raw-labels">${labels}</ul>` +
        `<select class="consensus"><option value="">—</option>${options}</select>` +
        `<textarea class="note" placeholder="discussion note"></textarea>` +
        `<button class="resolve">Resolve</button>` +
        `</article>`
      );
    })
    .join("");
  return head + cards;
}

export function renderDashboard(view: DashboardView): string {
  const head = `<h1>Agreement dashboard</h1>` + countsBar(view.session);
  if (view.report === null) {
    const remaining =
      view.session.counts.pending +
      view.session.counts.awaiting_second +
      view.session.counts.disagreement;
    return (
      head +
      `<p class="pending-report">${remaining} task(s) not yet final; ` +
      `agreement statistics appear when the session completes.</p>`
    );
  }
  const r = view.report;
  const pct = (x: number) => `${(100 * x).toFixed(1)}%`;
  return (
    head +
    `<dl class="report">` +
    `<dt>tasks</dt><dd data-stat="total">${r.total}</dd>` +
    `<dt>inter-annotator agreement</dt>` +
    `<dd data-stat="agreement">${pct(r.inter_annotator_agreement)}</dd>` +
    `<dt>retention</dt><dd data-stat="retention">${pct(r.retention_rate)}</dd>` +
    `<dt>Cohen's kappa</dt><dd data-stat="kappa">${r.kappa.toFixed(3)}</dd>` +
    `<dt>relabeled</dt><dd data-stat="relabeled">${r.relabeled}</dd>` +
    `</dl>`
  );
}

export function renderError(status: number, message: string): string {
  const title = status === 403 ? "Access denied" : `Error ${status}`;
  return (
    `<h1>${escapeHtml(title)}</h1>` +
    `<p class="error">${escapeHtml(message)}</p>`
  );
}
