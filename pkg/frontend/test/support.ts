/** Test support: recorded-fixture server stub and in-memory storage. */

import { readFileSync } from "node:fs";

import type { FetchLike } from "../src/api.js";
import type { StorageLike } from "../src/alerts.js";

export function fixture<T>(name: string): T {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as T;
}

export interface Route {
  method: string;
  path: string;
  /** Optional body matcher for POST routes that share a path. */
  matches?: (body: unknown) => boolean;
  status?: number;
  payload: unknown;
}

/** A fetch implementation that replays recorded payloads. */
export function fetchStub(routes: Route[]): FetchLike {
  return async (input, init) => {
    const method = (init?.method ?? "GET").toUpperCase();
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    for (const route of routes) {
      if (route.method !== method) continue;
      if (route.path !== input) continue;
      if (route.matches && !route.matches(body)) continue;
      return new Response(JSON.stringify(route.payload), {
        status: route.status ?? 200,
        headers: { "content-type": "application/json" },
      });
    }
    throw new Error(`no stub for ${method} ${input}`);
  };
}

export class MemoryStorage implements StorageLike {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.has(key) ? this.data.get(key)! : null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}
