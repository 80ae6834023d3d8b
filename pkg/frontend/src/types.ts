import { z } from "zod";

export const TaskStatus = z.enum([
  "pending",
  "awaiting_second",
  "disagreement",
  "final",
]);
export type TaskStatus = z.infer<typeof TaskStatus>;

// Redacted task payload: the server decides which labels are visible, so
// every label-bearing field is optional here and the UI renders only what
// actually arrived.
export const TaskView = z.object({
  task_id: z.string(),
  record_id: z.string(),
  text: z.string(),
  status: TaskStatus,
  labels: z.record(z.string()),
  consensus_label: z.string().nullable().optional(),
  model_label: z.string().optional(),
  note: z.string().nullable().optional(),
});
export type TaskView = z.infer<typeof TaskView>;

export const SessionSummary = z.object({
  session_id: z.string(),
  dataset: z.string(),
  schema: z.string(),
  labels: z.array(z.string()),
  annotators: z.array(z.string()),
  counts: z.object({
    pending: z.number(),
    awaiting_second: z.number(),
    disagreement: z.number(),
    final: z.number(),
  }),
});
export type SessionSummary = z.infer<typeof SessionSummary>;

export const AgreementReport = z.object({
  total: z.number(),
  inter_annotator_agreement: z.number(),
  retention_rate: z.number(),
  kappa: z.number(),
  relabeled: z.number(),
});
export type AgreementReport = z.infer<typeof AgreementReport>;

export const SubmitResult = z.object({
  task_id: z.string(),
  status: TaskStatus,
});
export type SubmitResult = z.infer<typeof SubmitResult>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}
