/**
 * Display-only min-max decimation: full traces are too dense to draw, so
 * each pixel-bucket keeps its extremes. Never used for anything but the
 * polyline geometry.
 */

export interface TracePoint {
  x: number;
  y: number;
}

export const MAX_POINTS_PER_VIEWPORT = 2000;

export function downsampleMinMax(samples: number[], maxPoints = MAX_POINTS_PER_VIEWPORT): TracePoint[] {
  if (samples.length <= maxPoints) {
    return samples.map((y, x) => ({ x, y }));
  }
  const buckets = Math.floor(maxPoints / 2);
  const width = samples.length / buckets;
  const out: TracePoint[] = [];
  for (let b = 0; b < buckets; b++) {
    const start = Math.floor(b * width);
    const end = Math.min(Math.floor((b + 1) * width), samples.length);
    let minAt = start;
    let maxAt = start;
    for (let i = start + 1; i < end; i++) {
      if (samples[i] < samples[minAt]) minAt = i;
      if (samples[i] > samples[maxAt]) maxAt = i;
    }
    const first = Math.min(minAt, maxAt);
    const second = Math.max(minAt, maxAt);
    out.push({ x: first, y: samples[first] });
    if (second !== first) {
      out.push({ x: second, y: samples[second] });
    }
  }
  return out;
}
