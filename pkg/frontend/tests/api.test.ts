import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ApiError } from "../src/types.js";
import { demoServer } from "./fake_server.js";

function client(server = demoServer()) {
  return { server, api: new ApiClient("http://fake", server.fetch) };
}

describe("ApiClient", () => {
  it("fetches a validated session summary", async () => {
    const { api } = client();
    const session = await api.session("s1");
    expect(session.annotators).toEqual(["alice", "bob"]);
    expect(session.counts.pending).toBe(4);
  });

  it("raises ApiError with the server status", async () => {
    const { api } = client();
    await expect(api.session("nope")).rejects.toMatchObject({
      status: 404,
    });
  });

  it("lists tasks filtered by status", async () => {
    const { api } = client();
    await api.submit("s1", "t00000", "alice", "Suicidal");
    await api.submit("s1", "t00000", "bob", "NonSuicidal");
    const disagreements = await api.tasks("s1", { status: "disagreement" });
    expect(disagreements.map((t) => t.task_id)).toEqual(["t00000"]);
  });

  it("maps 409 duplicates onto ApiError", async () => {
    const { api } = client();
    await api.submit("s1", "t00000", "alice", "Suicidal");
    try {
      await api.submit("s1", "t00000", "alice", "Suicidal");
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(409);
    }
  });

  it("maps 403 foreign annotators and 422 bad labels", async () => {
    const { api } = client();
    await expect(
      api.submit("s1", "t00000", "mallory", "Suicidal"),
    ).rejects.toMatchObject({ status: 403 });
    await expect(
      api.submit("s1", "t00000", "alice", "Bogus"),
    ).rejects.toMatchObject({ status: 422 });
  });

  it("report is 409 until every task is final", async () => {
    const { api } = client();
    await expect(api.report("s1")).rejects.toMatchObject({ status: 409 });
  });
});
