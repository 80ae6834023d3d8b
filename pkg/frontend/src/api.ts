import {
  AgreementReport,
  ApiError,
  SessionSummary,
  SubmitResult,
  TaskView,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

/** Thin typed client over the annotation service; every response is schema
 * validated so the UI can never render fields the API did not return. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async request(path: string, body?: unknown): Promise<unknown> {
    const init = body
      ? {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body: JSON.stringify(body),
        }
      : undefined;
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const payload = await resp.json();
    if (resp.status >= 400) {
      const detail =
        typeof payload === "object" && payload !== null && "error" in payload
          ? String((payload as { error: unknown }).error)
          : `HTTP ${resp.status}`;
      throw new ApiError(resp.status, detail);
    }
    return payload;
  }

  async session(sessionId: string): Promise<SessionSummary> {
    return SessionSummary.parse(await this.request(`/sessions/${sessionId}`));
  }

  async tasks(
    sessionId: string,
    opts: { annotator?: string; status?: string } = {},
  ): Promise<TaskView[]> {
    const params = new URLSearchParams();
    if (opts.annotator) params.set("annotator", opts.annotator);
    if (opts.status) params.set("status", opts.status);
    const query = params.toString();
    const payload = await this.request(
      `/sessions/${sessionId}/tasks${query ? "?" + query : ""}`,
    );
    const body = payload as { tasks: unknown[] };
    return body.tasks.map((t) => TaskView.parse(t));
  }

  async submit(
    sessionId: string,
    taskId: string,
    annotator: string,
    label: string,
  ): Promise<SubmitResult> {
    return SubmitResult.parse(
      await this.request(`/sessions/${sessionId}/tasks/${taskId}/labels`, {
        annotator,
        label,
      }),
    );
  }

  async resolve(
    sessionId: string,
    taskId: string,
    label: string,
    note?: string,
  ): Promise<SubmitResult> {
    return SubmitResult.parse(
      await this.request(`/sessions/${sessionId}/tasks/${taskId}/resolve`, {
        label,
        note: note ?? null,
      }),
    );
  }

  async report(sessionId: string): Promise<AgreementReport> {
    return AgreementReport.parse(
      await this.request(`/sessions/${sessionId}/report`),
    );
  }
}
