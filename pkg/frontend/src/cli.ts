#!/usr/bin/env node
/**
 * Render isacsim sweep CSVs to a figure.
 *
 *   isacsim-plot --kind pd_vs_rcs|pd_vs_ts|tradeoff --in FILE... --out FILE.svg|FILE.png [--title TEXT]
 *
 * Exit codes: 0 success, 2 usage or input-schema error, 1 anything else.
 */

import { pathToFileURL } from 'node:url';

import { CsvSchemaError } from './csv.js';
import { FIGURE_KINDS, FigureKind, FigureSpec, render } from './figure.js';

const USAGE =
  'usage: isacsim-plot --kind pd_vs_rcs|pd_vs_ts|tradeoff --in FILE... --out FILE.svg|FILE.png [--title TEXT]';

export function parseArgs(argv: string[]): FigureSpec {
  let kind: string | undefined;
  const inputs: string[] = [];
  let output: string | undefined;
  let title: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === '--kind') {
      kind = argv[++i];
    } else if (a === '--in') {
      while (i + 1 < argv.length && !argv[i + 1].startsWith('--')) {
        inputs.push(argv[++i]);
      }
    } else if (a === '--out') {
      output = argv[++i];
    } else if (a === '--title') {
      title = argv[++i];
    } else {
      throw new CsvSchemaError(`unknown argument: ${a}\n${USAGE}`);
    }
  }
  if (!kind || !FIGURE_KINDS.includes(kind as FigureKind)) {
    throw new CsvSchemaError(`--kind must be one of ${FIGURE_KINDS.join(', ')}\n${USAGE}`);
  }
  if (inputs.length === 0 || !output) {
    throw new CsvSchemaError(USAGE);
  }
  return { kind: kind as FigureKind, inputs, output, title };
}

export async function main(argv: string[]): Promise<number> {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const out = await render(spec);
    console.log(out);
    return 0;
  } catch (err) {
    if (err instanceof CsvSchemaError) {
      console.error(err.message);
      return 2;
    }
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;

if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
