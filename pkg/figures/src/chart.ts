import { Raster, RGB, BLACK, GRAY, LIGHT } from './raster.js'

export interface Rect {
  x: number
  y: number
  w: number
  h: number
}

export interface Scale {
  (v: number): number
  min: number
  max: number
}

export function linScale(min: number, max: number, pxLo: number, pxHi: number): Scale {
  if (!(max > min)) max = min + 1 // degenerate data still gets a frame
  const f = ((v: number) => pxLo + ((v - min) / (max - min)) * (pxHi - pxLo)) as Scale
  f.min = min
  f.max = max
  return f
}

export function dataRange(vals: number[], padFrac = 0.05): [number, number] {
  let lo = Infinity
  let hi = -Infinity
  for (const v of vals) {
    if (!Number.isFinite(v)) continue
    if (v < lo) lo = v
    if (v > hi) hi = v
  }
  if (lo === Infinity) return [0, 1]
  const pad = (hi - lo || Math.abs(hi) || 1) * padFrac
  return [lo - pad, hi + pad]
}

/** 1-2-5 tick ladder, at most maxTicks ticks inside [min, max]. */
export function ticks(min: number, max: number, maxTicks = 6): number[] {
  const span = max - min
  if (!(span > 0)) return [min]
  const rough = span / Math.max(2, maxTicks)
  const mag = Math.pow(10, Math.floor(Math.log10(rough)))
  let step = mag
  for (const m of [1, 2, 5, 10]) {
    if (mag * m >= rough) {
      step = mag * m
      break
    }
  }
  const out: number[] = []
  for (let v = Math.ceil(min / step) * step; v <= max + 1e-12 * span; v += step)
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v)
  return out
}

export function fmtTick(v: number): string {
  if (v === 0) return '0'
  const a = Math.abs(v)
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0).replace('e+', 'e')
  const s = v.toPrecision(3)
  return s.includes('.') ? s.replace(/\.?0+$/, '') : s
}

/** Axis frame with grid lines, tick labels and axis titles; returns nothing,
 * draws straight onto the raster. */
export function frame(
  r: Raster,
  rect: Rect,
  xs: Scale,
  ys: Scale,
  xLabel: string,
  yLabel: string,
  title = '',
): void {
  const x1 = rect.x + rect.w
  const y1 = rect.y + rect.h
  for (const tv of ticks(xs.min, xs.max)) {
    const px = Math.round(xs(tv))
    r.line(px, rect.y, px, y1, LIGHT)
    const lab = fmtTick(tv)
    r.text(px - r.textWidth(lab) / 2, y1 + 6, lab, BLACK)
  }
  for (const tv of ticks(ys.min, ys.max)) {
    const py = Math.round(ys(tv))
    r.line(rect.x, py, x1, py, LIGHT)
    const lab = fmtTick(tv)
    r.text(rect.x - r.textWidth(lab) - 6, py - 3, lab, BLACK)
  }
  // border last so the grid never overdraws it
  r.line(rect.x, rect.y, x1, rect.y, BLACK)
  r.line(rect.x, y1, x1, y1, BLACK)
  r.line(rect.x, rect.y, rect.x, y1, BLACK)
  r.line(x1, rect.y, x1, y1, BLACK)
  r.text(rect.x + rect.w / 2 - r.textWidth(xLabel) / 2, y1 + 18, xLabel, BLACK)
  r.text(rect.x, rect.y - 14, yLabel, BLACK)
  if (title) r.text(rect.x + rect.w / 2 - r.textWidth(title, 2) / 2, rect.y - 34, title, BLACK, 2)
}

export interface LegendEntry {
  label: string
  color: RGB
}

export function legend(r: Raster, rect: Rect, entries: LegendEntry[]): void {
  let y = rect.y + 8
  const x = rect.x + rect.w - 8
  for (const { label, color } of entries) {
    const w = r.textWidth(label)
    r.fillRect(x - w - 26, y + 1, 18, 4, color)
    r.text(x - w, y, label, BLACK)
    y += 14
  }
}

export function clampedSeries(xs: Scale, ys: Scale, x: number[], y: number[]): [number[], number[]] {
  const px: number[] = []
  const py: number[] = []
  for (let i = 0; i < x.length; i++) {
    if (!Number.isFinite(x[i]) || !Number.isFinite(y[i])) continue
    px.push(xs(x[i]))
    py.push(ys(y[i]))
  }
  return [px, py]
}

export { GRAY }
