import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

import { describe, expect, test } from 'vitest';

import { main, parseArgs } from '../src/cli.js';

const FIXTURES = path.join(__dirname, 'fixtures');

describe('parseArgs', () => {
  test('collects multiple inputs after --in', () => {
    const spec = parseArgs([
      '--kind', 'tradeoff',
      '--in', 'a.csv', 'b.csv', 'c.csv',
      '--out', 'fig.svg',
    ]);
    expect(spec.inputs).toEqual(['a.csv', 'b.csv', 'c.csv']);
    expect(spec.kind).toBe('tradeoff');
    expect(spec.output).toBe('fig.svg');
  });

  test('rejects unknown kind', () => {
    expect(() =>
      parseArgs(['--kind', 'heatmap', '--in', 'a.csv', '--out', 'f.svg']),
    ).toThrowError(/--kind must be one of/);
  });

  test('rejects missing output', () => {
    expect(() => parseArgs(['--kind', 'tradeoff', '--in', 'a.csv'])).toThrowError(/usage/);
  });
});

describe('main', () => {
  test('renders the tradeoff fixtures end to end', async () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'isacsim-plot-cli-'));
    const out = path.join(dir, 'tradeoff.svg');
    const code = await main([
      '--kind', 'tradeoff',
      '--in',
      path.join(FIXTURES, 'tradeoff', 'tradeoff_pure_comm.csv'),
      path.join(FIXTURES, 'tradeoff', 'tradeoff_concurrent.csv'),
      path.join(FIXTURES, 'tradeoff', 'tradeoff_time_sharing.csv'),
      '--out', out,
      '--title', 'strict window, strong target',
    ]);
    expect(code).toBe(0);
    expect(fs.readFileSync(out, 'utf-8')).toContain('strict window, strong target');
    fs.rmSync(dir, { recursive: true, force: true });
  });

  test('usage errors exit 2', async () => {
    expect(await main(['--kind', 'nope'])).toBe(2);
  });

  test('schema errors exit 2', async () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'isacsim-plot-cli-'));
    const bad = path.join(dir, 'bad.csv');
    fs.writeFileSync(bad, 'a,b\n1,2\n');
    const code = await main([
      '--kind', 'pd_vs_rcs', '--in', bad, '--out', path.join(dir, 'f.svg'),
    ]);
    expect(code).toBe(2);
    fs.rmSync(dir, { recursive: true, force: true });
  });

  test('missing input file exits 1', async () => {
    const code = await main([
      '--kind', 'pd_vs_rcs', '--in', '/nonexistent.csv', '--out', '/tmp/f.svg',
    ]);
    expect(code).toBe(1);
  });
});
