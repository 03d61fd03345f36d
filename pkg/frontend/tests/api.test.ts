import { describe, expect, it } from "vitest";
import { Api, ApiError, StaleResponse } from "../src/api";

function jsonResponse(data: unknown, status = 200): Response {
  return {
    ok: status < 400,
    status,
    statusText: String(status),
    json: async () => data,
  } as unknown as Response;
}

describe("Api", () => {
  it("returns parsed payloads", async () => {
    const api = new Api(async () => jsonResponse([{ name: "ehr-af" }]));
    const models = await api.models();
    expect(models[0].name).toBe("ehr-af");
  });

  it("raises ApiError with the server detail", async () => {
    const api = new Api(async () => jsonResponse({ detail: "no cohort loaded" }, 409));
    await expect(api.schema()).rejects.toMatchObject({ status: 409, message: "no cohort loaded" });
    await expect(api.schema()).rejects.toBeInstanceOf(ApiError);
  });

  it("stringifies structured validation details", async () => {
    const detail = [{ loc: ["body", "threshold"], msg: "field required" }];
    const api = new Api(async () => jsonResponse({ detail }, 422));
    await expect(api.models()).rejects.toMatchObject({ message: JSON.stringify(detail) });
  });

  it("discards a response that was superseded on its channel", async () => {
    const resolvers: ((r: Response) => void)[] = [];
    const api = new Api(() => new Promise<Response>((res) => resolvers.push(res)));

    const first = api.distribution({ model: "ehr-af" });
    const second = api.distribution({ model: "ehr-af" });
    expect(resolvers.length).toBe(2);

    resolvers[0](jsonResponse({ n: 1 }));
    await expect(first).rejects.toBeInstanceOf(StaleResponse);

    resolvers[1](jsonResponse({ n: 2 }));
    await expect(second).resolves.toMatchObject({ n: 2 });
  });

  it("keeps channels independent", async () => {
    const resolvers: ((r: Response) => void)[] = [];
    const api = new Api(() => new Promise<Response>((res) => resolvers.push(res)));

    const dist = api.distribution({ model: "ehr-af" });
    const models = api.models();

    resolvers[1](jsonResponse([]));
    await expect(models).resolves.toEqual([]);
    resolvers[0](jsonResponse({ n: 3 }));
    await expect(dist).resolves.toMatchObject({ n: 3 });
  });
});
