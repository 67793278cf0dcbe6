/** Test doubles for the fetch layer.
 *
 * StubFetch replays recorded wire exchanges (strict: an unrecorded request
 * is a test failure), routeFetch fakes endpoints with plain functions, and
 * deferred() exposes a promise's resolvers for race-order tests.
 */

import { FetchLike } from "../src/api.js";

export interface Exchange {
  path: string;
  body: unknown;
  response: unknown;
}

function sortDeep(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortDeep);
  if (value !== null && typeof value === "object") {
    const record = value as Record<string, unknown>;
    return Object.fromEntries(
      Object.keys(record)
        .sort()
        .map((k) => [k, sortDeep(record[k])]),
    );
  }
  return value;
}

/** Key-order-independent JSON rendering, for matching request bodies. */
export function canonical(value: unknown): string {
  return value === undefined ? "" : JSON.stringify(sortDeep(value));
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function pathOf(url: string): string {
  return url.startsWith("http") ? new URL(url).pathname : url;
}

export class StubFetch {
  private readonly map = new Map<string, unknown>();
  readonly calls: Array<{ path: string; body: unknown }> = [];
  readonly misses: string[] = [];

  constructor(exchanges: Exchange[] = []) {
    for (const e of exchanges) this.add(e.path, e.body, e.response);
  }

  add(path: string, body: unknown, response: unknown): void {
    this.map.set(`${path}|${canonical(body)}`, response);
  }

  readonly fetch: FetchLike = async (url, init) => {
    const path = pathOf(url);
    const body = init?.body !== undefined ? JSON.parse(String(init.body)) : undefined;
    this.calls.push({ path, body });
    const key = `${path}|${canonical(body)}`;
    const recorded = this.map.get(key);
    if (recorded === undefined) {
      this.misses.push(key);
      throw new Error(`no recorded exchange for ${key.slice(0, 160)}`);
    }
    return jsonResponse(recorded);
  };
}

/** Fake endpoints with handler functions: path -> (body) -> response body. */
export function routeFetch(routes: Record<string, (body: unknown) => unknown>): {
  fetch: FetchLike;
  calls: Array<{ path: string; body: unknown }>;
} {
  const calls: Array<{ path: string; body: unknown }> = [];
  const fetch: FetchLike = async (url, init) => {
    const path = pathOf(url);
    const body = init?.body !== undefined ? JSON.parse(String(init.body)) : undefined;
    calls.push({ path, body });
    const handler = routes[path];
    if (handler === undefined) {
      return jsonResponse({ detail: `no route for ${path}` }, 404);
    }
    return jsonResponse(handler(body));
  };
  return { fetch, calls };
}

/** A fetch that always fails at the network layer. */
export function unreachableFetch(): FetchLike {
  return async () => {
    throw new TypeError("fetch failed");
  };
}

export function deferred<T>(): {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (reason?: unknown) => void;
} {
  let resolve!: (value: T) => void;
  let reject!: (reason?: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}
