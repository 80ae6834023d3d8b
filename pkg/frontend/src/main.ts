import { ApiClient } from "./api.js";
import { parseRoute } from "./router.js";
import { AppState, QueueView } from "./state.js";
import {
  renderAdjudication,
  renderDashboard,
  renderError,
  renderQueue,
} from "./views.js";
import { ApiError } from "./types.js";

/** Browser bootstrap. Configuration comes from the query string:
 *  ?base=<api base url>&session=<session id>  */
function config(): { base: string; session: string } {
  const params = new URLSearchParams(window.location.search);
  return {
    base: params.get("base") ?? "http://127.0.0.1:8700",
    session: params.get("session") ?? "",
  };
}

async function show(root: HTMLElement, app: AppState): Promise<void> {
  const route = parseRoute(window.location.hash) ?? {
    name: "dashboard" as const,
  };
  try {
    if (route.name === "queue") {
      let view = await app.loadQueue(route.annotator);
      root.innerHTML = renderQueue(view);
      wireQueue(root, app, view);
    } else if (route.name === "adjudication") {
      const view = await app.loadAdjudication();
      root.innerHTML = renderAdjudication(view);
      wireAdjudication(root, app);
    } else {
      root.innerHTML = renderDashboard(await app.loadDashboard());
    }
  } catch (err) {
    if (err instanceof ApiError) {
      root.innerHTML = renderError(err.status, err.message);
    } else {
      throw err;
    }
  }
}

function wireQueue(root: HTMLElement, app: AppState, view: QueueView): void {
  root.querySelectorAll<HTMLButtonElement>("button[data-label]").forEach(
    (button) => {
      button.addEventListener("click", async () => {
        // disable all controls until the server acknowledges
        root
          .querySelectorAll<HTMLButtonElement>("button[data-label]")
          .forEach((b) => (b.disabled = true));
        const next = await app.submit(view, button.dataset.label ?? "");
        root.innerHTML = renderQueue(next);
        wireQueue(root, app, next);
      });
    },
  );
}

function wireAdjudication(root: HTMLElement, app: AppState): void {
  root.querySelectorAll<HTMLElement>("article.task").forEach((card) => {
    const button = card.querySelector<HTMLButtonElement>("button.resolve");
    button?.addEventListener("click", async () => {
      const select = card.querySelector<HTMLSelectElement>("select.consensus");
      const note = card.querySelector<HTMLTextAreaElement>("textarea.note");
      const view = await app.adjudicate(
        card.dataset.task ?? "",
        select?.value ?? "",
        note?.value || undefined,
      );
      root.innerHTML = renderAdjudication(view);
      wireAdjudication(root, app);
    });
  });
}

export function start(): void {
  const { base, session } = config();
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const app = new AppState(new ApiClient(base), session);
  window.addEventListener("hashchange", () => void show(root, app));
  void show(root, app);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
