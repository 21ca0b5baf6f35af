/** The one deployment setting: where the curation service lives. */

export function baseUrl(): string {
  const meta = document.querySelector('meta[name="xv-base-url"]');
  return meta?.getAttribute("content") ?? "http://127.0.0.1:8787";
}
