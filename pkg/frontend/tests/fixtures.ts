import { readFileSync } from "node:fs";

import type { Envelope } from "../src/types.js";

export function fixture<T>(name: string): T {
  const raw = readFileSync(new URL(`./fixtures/${name}.json`, import.meta.url), "utf-8");
  const envelope = JSON.parse(raw) as Envelope<T>;
  if (envelope.status !== "ok" || envelope.data === undefined) {
    throw new Error(`fixture ${name} is not an ok envelope`);
  }
  return envelope.data;
}

export function rawFixture(name: string): string {
  return readFileSync(new URL(`./fixtures/${name}.json`, import.meta.url), "utf-8");
}
