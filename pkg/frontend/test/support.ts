/** Test support: recorded contract fixtures and a scriptable fetch.
 *
 * Fixtures are the JSON files recorded from the real service
 * (contracts/ at the repository root); tests run against those instead
 * of a live server, so passing here means the UI agrees with what the
 * service actually sends.
 */

import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import type {
  EntitySummary,
  FaceRow,
  FetchLike,
  GraphDoc,
  PreviewResponse,
} from "../src/api.js";

// vitest runs with frontend/ as the working directory
const CONTRACTS_DIR = resolve(process.cwd(), "..", "contracts");

function load<T>(name: string): T {
  const path = resolve(CONTRACTS_DIR, `${name}.json`);
  return JSON.parse(readFileSync(path, "utf8")) as T;
}

export const fixtures = {
  entities: () => load<EntitySummary[]>("entities"),
  facesMean: () => load<FaceRow[]>("faces_qa_mean"),
  facesReference: () => load<FaceRow[]>("faces_qa_reference"),
  previewKeepall: () => load<PreviewResponse>("preview_qa_keepall"),
  previewMid: () => load<PreviewResponse>("preview_qa_mid"),
  previewStrict: () => load<PreviewResponse>("preview_qa_strict"),
  previewStrictest: () => load<PreviewResponse>("preview_qa_strictest"),
  missingReference: () => load<{ detail: string }>("error_missing_reference"),
  graph: () => load<GraphDoc>("graph"),
};

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export type Route = (call: RecordedCall) => { status: number; body: unknown };

/** fetch stand-in: exact-path routes, and a log of every request made. */
export function mockFetch(routes: Record<string, Route>): {
  fetchFn: FetchLike;
  calls: RecordedCall[];
} {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = (input, init) => {
    const call: RecordedCall = {
      url: input,
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
    };
    calls.push(call);
    const route = routes[input];
    if (!route) {
      return Promise.resolve(
        new Response(JSON.stringify({ detail: `no route for ${input}` }), {
          status: 404,
          headers: { "Content-Type": "application/json" },
        }),
      );
    }
    const { status, body } = route(call);
    return Promise.resolve(
      new Response(JSON.stringify(body), {
        status,
        headers: { "Content-Type": "application/json" },
      }),
    );
  };
  return { fetchFn, calls };
}

export function ok(body: unknown): Route {
  return () => ({ status: 200, body });
}
