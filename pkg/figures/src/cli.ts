import { existsSync } from 'fs'
import { dirname, join } from 'path'
import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'
import { render, FigureKind } from './figures.js'
import { CONTRACTS } from './csv.js'

const KINDS = Object.keys(CONTRACTS) as FigureKind[]

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .usage('render one figure from a harness CSV artifact')
    .option('input', { type: 'string', demandOption: true, describe: 'CSV artifact path' })
    .option('output', { type: 'string', demandOption: true, describe: 'PNG path to write' })
    .option('kind', { choices: KINDS, demandOption: true, describe: 'figure kind' })
    .option('manifest', {
      type: 'string',
      describe: 'run manifest with overlay formulas; defaults to manifest.json next to the input',
    })
    .option('title', { type: 'string', default: '' })
    .strict()
    .parse()

  const sibling = join(dirname(args.input), 'manifest.json')
  const manifest = args.manifest ?? (existsSync(sibling) ? sibling : undefined)
  try {
    const rep = render({
      kind: args.kind as FigureKind,
      input: args.input,
      output: args.output,
      manifest,
      title: args.title || undefined,
    })
    console.log(`wrote ${rep.output} (${rep.rows} rows${rep.overlay ? ', overlay' : ''})`)
    return 0
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`)
    return 1
  }
}

const entry = process.argv[1] ?? ''
if (entry.endsWith('cli.js') || entry.endsWith('cli.ts')) {
  main(hideBin(process.argv)).then(code => {
    process.exitCode = code
  })
}
