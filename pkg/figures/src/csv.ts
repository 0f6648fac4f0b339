import { readFileSync } from 'fs'
import Papa from 'papaparse'

export interface Table {
  header: string[]
  rows: Record<string, number>[]
}

/** Column contracts per artifact; a figure kind refuses input whose header is
 * missing any required column and says which contract it expected. */
export const CONTRACTS: Record<string, string[]> = {
  trajectory: ['t', 'Q', 'P', 'e'],
  histogram: ['bin_center', 'density'],
  drift: ['bin_center', 'estimate', 'stderr', 'count', 'reliable', 'predicted'],
  kernel: ['t', 'kappa11'],
  snapshots: ['t', 'x', 'rho'],
  entropy: ['t', 'S'],
}

export function readTable(path: string): Table {
  const text = readFileSync(path, 'utf8')
  const parsed = Papa.parse<Record<string, number>>(text.trim(), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  })
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0]
    throw new Error(`${path}: CSV parse error at row ${e.row}: ${e.message}`)
  }
  const header = (parsed.meta.fields ?? []).map(f => f.trim())
  return { header, rows: parsed.data }
}

export function requireColumns(kind: string, table: Table, path: string): void {
  const wanted = CONTRACTS[kind]
  if (!wanted) throw new Error(`unknown figure kind '${kind}'`)
  const missing = wanted.filter(c => !table.header.includes(c))
  if (missing.length > 0)
    throw new Error(
      `${path}: header [${table.header.join(', ')}] does not satisfy the ` +
        `'${kind}' contract [${wanted.join(', ')}]; missing: ${missing.join(', ')}`,
    )
}

export function column(table: Table, name: string): number[] {
  return table.rows.map(r => Number(r[name]))
}
