import { readFileSync } from 'fs'
import { z } from 'zod'

// overlay curves arrive as closed-form descriptions in the run manifest; the
// renderer evaluates them but never re-derives or re-fits anything
const PowerExp = z.object({
  kind: z.literal('power_exp'),
  exponent: z.number(),
  gauss_coeff: z.number(),
  domain: z.tuple([z.number(), z.number()]),
})

const GibbsQuadratic = z.object({
  kind: z.literal('gibbs_quadratic'),
  quad_coeff: z.number(),
  domain: z.tuple([z.number(), z.number()]),
})

export const OverlaySchema = z.discriminatedUnion('kind', [PowerExp, GibbsQuadratic])
export type Overlay = z.infer<typeof OverlaySchema>

const ManifestSchema = z.object({
  experiment: z.string(),
  seed: z.number(),
  config: z.object({ name: z.string(), seed: z.number(), params: z.record(z.unknown()) }),
  wall_time_s: z.number(),
  checks: z.record(z.object({ passed: z.boolean(), value: z.number(), target: z.string() })),
  artifacts: z.array(z.string()),
  overlays: z.record(OverlaySchema).default({}),
})

export type Manifest = z.infer<typeof ManifestSchema>

export function loadManifest(path: string): Manifest {
  const parsed = ManifestSchema.safeParse(JSON.parse(readFileSync(path, 'utf8')))
  if (!parsed.success)
    throw new Error(`${path}: not a run manifest: ${parsed.error.issues[0].message}`)
  return parsed.data
}

/** Evaluate a declared overlay as a normalized density on the given grid.
 * Normalization is plain trapezoid mass on the overlay's own domain. */
export function overlayDensity(overlay: Overlay, xs: number[]): number[] {
  const [a, b] = overlay.domain
  const n = 2001
  const h = (b - a) / (n - 1)
  const raw = (x: number): number =>
    overlay.kind === 'power_exp'
      ? Math.pow(Math.abs(x), overlay.exponent) * Math.exp(-overlay.gauss_coeff * x * x)
      : Math.exp(-overlay.quad_coeff * x * x)
  let mass = 0
  for (let i = 0; i < n; i++) {
    const w = i === 0 || i === n - 1 ? 0.5 : 1
    mass += w * raw(a + i * h)
  }
  mass *= h
  return xs.map(x => (x < a || x > b ? 0 : raw(x) / mass))
}
