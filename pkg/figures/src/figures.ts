import { writeFileSync, mkdirSync } from 'fs'
import { dirname, basename } from 'path'
import { Raster, BLACK, BLUE, ORANGE, GREEN, RED, GRAY } from './raster.js'
import { linScale, dataRange, frame, legend, Rect } from './chart.js'
import { readTable, requireColumns, column, Table } from './csv.js'
import { loadManifest, overlayDensity, Overlay } from './manifest.js'

export type FigureKind = 'trajectory' | 'histogram' | 'drift' | 'kernel' | 'snapshots' | 'entropy'

export interface FigureSpec {
  kind: FigureKind
  input: string
  output: string
  manifest?: string // companion manifest.json; source of overlay formulas
  title?: string
  width?: number
  height?: number
}

export interface RenderReport {
  output: string
  rows: number
  overlay: boolean
}

const MARGIN = { left: 64, right: 16, top: 48, bottom: 40 }

function plotRect(width: number, height: number): Rect {
  return {
    x: MARGIN.left,
    y: MARGIN.top,
    w: width - MARGIN.left - MARGIN.right,
    h: height - MARGIN.top - MARGIN.bottom,
  }
}

function pickOverlay(spec: FigureSpec): Overlay | undefined {
  if (!spec.manifest) return undefined
  const m = loadManifest(spec.manifest)
  return m.overlays[basename(spec.input)]
}

// ---------------------------------------------------------------- kinds

/** Three stacked panels Q, P, e over a shared time axis; the third panel is
 * the heat account whose monotone growth the source system guarantees. */
function renderTrajectory(spec: FigureSpec, table: Table): RenderReport {
  const W = spec.width ?? 760
  const H = spec.height ?? 880
  const r = new Raster(W, H)
  const t = column(table, 't')
  const [tLo, tHi] = dataRange(t, 0)
  const panelNames = ['Q', 'P', 'e'] as const
  const colors = [BLUE, ORANGE, GREEN]
  const gap = 46
  const panelH = Math.floor((H - MARGIN.top - MARGIN.bottom - 2 * gap) / 3)
  if (spec.title) r.text(W / 2 - r.textWidth(spec.title, 2) / 2, 10, spec.title, BLACK, 2)
  panelNames.forEach((name, i) => {
    const rect: Rect = {
      x: MARGIN.left,
      y: MARGIN.top + i * (panelH + gap),
      w: W - MARGIN.left - MARGIN.right,
      h: panelH,
    }
    const v = column(table, name)
    const xs = linScale(tLo, tHi, rect.x, rect.x + rect.w)
    const [lo, hi] = dataRange(v)
    const ys = linScale(lo, hi, rect.y + rect.h, rect.y)
    frame(r, rect, xs, ys, i === 2 ? 't' : '', name)
    r.polyline(t.map(xs), v.map(ys), colors[i], 2)
  })
  return write(spec, r, table.rows.length, false)
}

function renderHistogram(spec: FigureSpec, table: Table): RenderReport {
  const W = spec.width ?? 720
  const H = spec.height ?? 480
  const r = new Raster(W, H)
  const rect = plotRect(W, H)
  const centers = column(table, 'bin_center')
  const density = column(table, 'density')
  const overlay = pickOverlay(spec)

  const binW = centers.length > 1 ? centers[1] - centers[0] : 1
  const [xLo, xHi] = [centers[0] - binW / 2, centers[centers.length - 1] + binW / 2]
  const xs = linScale(xLo, xHi, rect.x, rect.x + rect.w)
  let yHi = Math.max(...density)
  const curve = overlay
    ? overlayDensity(overlay, centers.map((_, i) => xLo + ((i + 0.5) * (xHi - xLo)) / centers.length))
    : []
  if (curve.length > 0) yHi = Math.max(yHi, ...curve)
  const ys = linScale(0, yHi * 1.06, rect.y + rect.h, rect.y)

  frame(r, rect, xs, ys, 'y', 'density', spec.title ?? '')
  const y0 = Math.round(ys(0))
  centers.forEach((c, i) => {
    const px0 = Math.round(xs(c - binW / 2)) + 1
    const px1 = Math.round(xs(c + binW / 2)) - 1
    const py = Math.round(ys(density[i]))
    r.fillRect(px0, py, Math.max(1, px1 - px0), y0 - py, BLUE)
  })
  if (overlay) {
    // fine grid so the curve reads as smooth at any bin count
    const n = 400
    const gx: number[] = []
    for (let i = 0; i < n; i++) gx.push(xLo + ((i + 0.5) * (xHi - xLo)) / n)
    const gy = overlayDensity(overlay, gx)
    r.polyline(gx.map(xs), gy.map(ys), RED, 2)
    legend(r, rect, [
      { label: 'empirical', color: BLUE },
      { label: overlay.kind, color: RED },
    ])
  }
  return write(spec, r, table.rows.length, overlay !== undefined)
}

function renderDrift(spec: FigureSpec, table: Table): RenderReport {
  const W = spec.width ?? 720
  const H = spec.height ?? 480
  const r = new Raster(W, H)
  const rect = plotRect(W, H)
  const centers = column(table, 'bin_center')
  const est = column(table, 'estimate')
  const se = column(table, 'stderr')
  const reliable = table.rows.map(row => String(row.reliable) === 'True' || row.reliable === 1)
  const pred = column(table, 'predicted')

  const [xLo, xHi] = dataRange(centers)
  const lo = Math.min(...est.map((v, i) => v - 2 * se[i]), ...pred)
  const hi = Math.max(...est.map((v, i) => v + 2 * se[i]), ...pred)
  const xs = linScale(xLo, xHi, rect.x, rect.x + rect.w)
  const ys = linScale(lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo), rect.y + rect.h, rect.y)

  frame(r, rect, xs, ys, 'y', 'drift', spec.title ?? '')
  r.polyline(centers.map(xs), pred.map(ys), RED, 2)
  centers.forEach((c, i) => {
    const color = reliable[i] ? BLUE : GRAY
    r.line(xs(c), ys(est[i] - 2 * se[i]), xs(c), ys(est[i] + 2 * se[i]), color, 1)
    r.marker(xs(c), ys(est[i]), color, 5)
  })
  legend(r, rect, [
    { label: 'binned estimate (2 se)', color: BLUE },
    { label: 'predicted', color: RED },
  ])
  return write(spec, r, table.rows.length, false)
}

function renderKernel(spec: FigureSpec, table: Table): RenderReport {
  const W = spec.width ?? 720
  const H = spec.height ?? 480
  const r = new Raster(W, H)
  const rect = plotRect(W, H)
  const t = column(table, 't')
  const k = column(table, 'kappa11')
  const xs = linScale(...dataRange(t, 0), rect.x, rect.x + rect.w)
  const ys = linScale(...dataRange(k), rect.y + rect.h, rect.y)
  frame(r, rect, xs, ys, 't', 'kappa11', spec.title ?? '')
  if (ys.min < 0 && ys.max > 0) {
    const py = Math.round(ys(0))
    r.line(rect.x, py, rect.x + rect.w, py, GRAY)
  }
  r.polyline(t.map(xs), k.map(ys), BLUE, 2)
  return write(spec, r, table.rows.length, false)
}

/** One profile per snapshot time, light-to-dark as time advances, plus the
 * manifest's limiting profile when declared. */
function renderSnapshots(spec: FigureSpec, table: Table): RenderReport {
  const W = spec.width ?? 720
  const H = spec.height ?? 480
  const r = new Raster(W, H)
  const rect = plotRect(W, H)
  const overlay = pickOverlay(spec)

  const groups = new Map<number, { x: number[]; rho: number[] }>()
  for (const row of table.rows) {
    const t = Number(row.t)
    if (!groups.has(t)) groups.set(t, { x: [], rho: [] })
    const g = groups.get(t)!
    g.x.push(Number(row.x))
    g.rho.push(Number(row.rho))
  }
  const times = [...groups.keys()].sort((a, b) => a - b)
  const allX = column(table, 'x')
  const allRho = column(table, 'rho')
  const xs = linScale(...dataRange(allX, 0), rect.x, rect.x + rect.w)
  const ys = linScale(0, dataRange(allRho)[1], rect.y + rect.h, rect.y)

  frame(r, rect, xs, ys, 'x', 'rho', spec.title ?? '')
  times.forEach((t, i) => {
    const g = groups.get(t)!
    const shade = times.length === 1 ? 0 : i / (times.length - 1)
    const c: [number, number, number] = [
      Math.round(205 - 174 * shade),
      Math.round(225 - 106 * shade),
      Math.round(240 - 60 * shade),
    ]
    r.polyline(g.x.map(xs), g.rho.map(ys), c, i === times.length - 1 ? 2 : 1)
  })
  if (overlay) {
    const gx: number[] = []
    for (let i = 0; i < 400; i++) gx.push(xs.min + ((i + 0.5) * (xs.max - xs.min)) / 400)
    const gy = overlayDensity(overlay, gx)
    r.polyline(gx.map(xs), gy.map(ys), RED, 1)
    legend(r, rect, [
      { label: `t=${times[0]} .. t=${times[times.length - 1]}`, color: BLUE },
      { label: overlay.kind, color: RED },
    ])
  }
  return write(spec, r, table.rows.length, overlay !== undefined)
}

function renderEntropy(spec: FigureSpec, table: Table): RenderReport {
  const W = spec.width ?? 720
  const H = spec.height ?? 480
  const r = new Raster(W, H)
  const rect = plotRect(W, H)
  const t = column(table, 't')
  const S = column(table, 'S')
  const xs = linScale(...dataRange(t, 0), rect.x, rect.x + rect.w)
  const ys = linScale(...dataRange(S), rect.y + rect.h, rect.y)
  frame(r, rect, xs, ys, 't', 'S', spec.title ?? '')
  r.polyline(t.map(xs), S.map(ys), GREEN, 2)
  t.forEach((tv, i) => r.marker(xs(tv), ys(S[i]), GREEN, 5))
  return write(spec, r, table.rows.length, false)
}

function write(spec: FigureSpec, r: Raster, rows: number, overlay: boolean): RenderReport {
  mkdirSync(dirname(spec.output), { recursive: true })
  writeFileSync(spec.output, r.png())
  return { output: spec.output, rows, overlay }
}

const RENDERERS: Record<FigureKind, (spec: FigureSpec, table: Table) => RenderReport> = {
  trajectory: renderTrajectory,
  histogram: renderHistogram,
  drift: renderDrift,
  kernel: renderKernel,
  snapshots: renderSnapshots,
  entropy: renderEntropy,
}

/** Read the input CSV, check it against the kind's column contract, draw, and
 * write the PNG. Inputs are only ever opened for reading. */
export function render(spec: FigureSpec): RenderReport {
  const table = readTable(spec.input)
  requireColumns(spec.kind, table, spec.input)
  if (table.rows.length === 0) throw new Error(`${spec.input}: no data rows`)
  return RENDERERS[spec.kind](spec, table)
}
