import { ApiClient } from "./api.js";
import {
  AgreementReport,
  ApiError,
  SessionSummary,
  TaskView,
} from "./types.js";

export interface QueueView {
  session: SessionSummary;
  annotator: string;
  // first task this annotator can still act on, labels redacted by the API
  current: TaskView | null;
  submitting: boolean;
  toast: string | null;
}

export interface AdjudicationView {
  session: SessionSummary;
  tasks: TaskView[]; // disagreement tasks only, both raw labels visible
  toast: string | null;
}

export interface DashboardView {
  session: SessionSummary;
  report: AgreementReport | null; // null until every task is final
}

function actionable(task: TaskView, annotator: string): boolean {
  if (task.status === "final" || task.status === "disagreement") return false;
  return !(annotator in task.labels);
}

/** All mutations go through the server and every view is rebuilt from a
 * refetch; the client holds no authoritative state. */
export class AppState {
  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  async loadQueue(annotator: string): Promise<QueueView> {
    const session = await this.api.session(this.sessionId);
    const tasks = await this.api.tasks(this.sessionId, { annotator });
    const current = tasks.find((t) => actionable(t, annotator)) ?? null;
    return { session, annotator, current, submitting: false, toast: null };
  }

  /** Submission contract: controls stay disabled (submitting=true on the
   * intermediate view) until the server acknowledges, then the queue is
   * refetched. A 409 is non-destructive: refetch and surface a toast. */
  async submit(view: QueueView, label: string): Promise<QueueView> {
    if (view.submitting || view.current === null) return view;
    try {
      await this.api.submit(
        this.sessionId,
        view.current.task_id,
        view.annotator,
        label,
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        const fresh = await this.loadQueue(view.annotator);
        return { ...fresh, toast: err.message };
      }
      throw err;
    }
    return this.loadQueue(view.annotator);
  }

  async loadAdjudication(): Promise<AdjudicationView> {
    const session = await this.api.session(this.sessionId);
    const tasks = await this.api.tasks(this.sessionId, {
      status: "disagreement",
    });
    return { session, tasks, toast: null };
  }

  async adjudicate(
    taskId: string,
    label: string,
    note?: string,
  ): Promise<AdjudicationView> {
    if (!label) {
      const view = await this.loadAdjudication();
      return { ...view, toast: "select a consensus label first" };
    }
    try {
      await this.api.resolve(this.sessionId, taskId, label, note);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        const view = await this.loadAdjudication();
        return { ...view, toast: err.message };
      }
      throw err;
    }
    return this.loadAdjudication();
  }

  async loadDashboard(): Promise<DashboardView> {
    const session = await this.api.session(this.sessionId);
    let report: AgreementReport | null = null;
    try {
      report = await this.api.report(this.sessionId);
    } catch (err) {
      if (!(err instanceof ApiError && err.status === 409)) throw err;
      // session not fully final yet; dashboard shows counts only
    }
    return { session, report };
  }
}
