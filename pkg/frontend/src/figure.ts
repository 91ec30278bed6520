/**
 * Figure construction and SVG rendering for isacsim sweep results.
 *
 * Three figure kinds:
 *   pd_vs_rcs  - detection probability against target RCS [dBsm]
 *   pd_vs_ts   - detection probability against the sensing window [ms]
 *   tradeoff   - frontier of detection probability against mean SNR [dB]
 *
 * Series grouping: for the sweep kinds each (policy, policy_param) pair
 * is one curve; for the trade-off the policy parameter varies along the
 * curve, so each policy (with its swept parameter) is one series. The
 * footer carries the run seed(s) and a content hash so every figure can
 * be traced back to the run that produced it.
 */

import { createHash } from 'node:crypto';
import * as fs from 'node:fs';
import * as path from 'node:path';

import { CsvSchemaError, SweepRow, parseSweepRows } from './csv.js';

export type FigureKind = 'pd_vs_rcs' | 'pd_vs_ts' | 'tradeoff';

export const FIGURE_KINDS: FigureKind[] = ['pd_vs_rcs', 'pd_vs_ts', 'tradeoff'];

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  title?: string;
  xlim?: [number, number];
  ylim?: [number, number];
}

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  key: string;
  label: string;
  points: Point[];
}

const PARAM_NAME: Record<string, string> = {
  concurrent: 'rho',
  time_sharing: 'beta',
};

function xValue(row: SweepRow, kind: FigureKind): number {
  if (kind === 'tradeoff') return row.meanSnrDb;
  if (kind === 'pd_vs_ts') return row.sweepValue * 1e3; // seconds -> ms
  return row.sweepValue;
}

function fmt(v: number): string {
  if (!Number.isFinite(v)) return String(v);
  const s = Number(v.toPrecision(6)).toString();
  return s;
}

export function buildSeries(rows: SweepRow[], kind: FigureKind): Series[] {
  const groups = new Map<string, { label: string; rows: SweepRow[] }>();
  for (const row of rows) {
    let key: string;
    let label: string;
    if (kind === 'tradeoff') {
      key = row.policy;
      label = row.policy;
    } else {
      const pname = PARAM_NAME[row.policy];
      key = `${row.policy}@${row.policyParam ?? '-'}`;
      label =
        row.policyParam === null || pname === undefined
          ? row.policy
          : `${row.policy} (${pname}=${fmt(row.policyParam)})`;
    }
    const g = groups.get(key);
    if (g) g.rows.push(row);
    else groups.set(key, { label, rows: [row] });
  }
  const series: Series[] = [];
  for (const [key, g] of [...groups.entries()].sort((a, b) => (a[0] < b[0] ? -1 : 1))) {
    let label = g.label;
    if (kind === 'tradeoff') {
      const params = g.rows.map((r) => r.policyParam).filter((p): p is number => p !== null);
      const pname = PARAM_NAME[g.rows[0].policy];
      if (params.length > 0 && pname) {
        const lo = Math.min(...params);
        const hi = Math.max(...params);
        label = lo === hi ? `${g.rows[0].policy} (${pname}=${fmt(lo)})`
          : `${g.rows[0].policy} (${pname} ${fmt(lo)}..${fmt(hi)})`;
      }
    }
    const points = g.rows
      .map((r) => ({ x: xValue(r, kind), y: r.pD }))
      .filter((p) => Number.isFinite(p.x) && Number.isFinite(p.y))
      .sort((a, b) => a.x - b.x);
    if (points.length > 0) series.push({ key, label, points });
  }
  if (series.length === 0) {
    throw new CsvSchemaError('no plottable points in the input rows');
  }
  return series;
}

const X_LABEL: Record<FigureKind, string> = {
  pd_vs_rcs: 'target RCS [dBsm]',
  pd_vs_ts: 'sensing window T_s [ms]',
  tradeoff: 'mean communication SNR [dB]',
};

const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b', '#17becf', '#7f7f7f', '#bcbd22', '#e377c2'];

function ticks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step0 = Math.pow(10, Math.floor(Math.log10(span / count)));
  let step = step0;
  for (const m of [1, 2, 5, 10]) {
    step = m * step0;
    if (span / step <= count) break;
  }
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

function extent(series: Series[], pick: (p: Point) => number): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      const v = pick(p);
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

function marker(cx: number, cy: number, shape: number, color: string): string {
  const r = 3.5;
  switch (shape % 4) {
    case 0:
      return `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${r}" fill="${color}"/>`;
    case 1:
      return `<rect x="${fmt(cx - r)}" y="${fmt(cy - r)}" width="${2 * r}" height="${2 * r}" fill="${color}"/>`;
    case 2:
      return `<path d="M ${fmt(cx)} ${fmt(cy - r - 1)} L ${fmt(cx + r + 1)} ${fmt(cy + r)} L ${fmt(cx - r - 1)} ${fmt(cy + r)} Z" fill="${color}"/>`;
    default:
      return `<path d="M ${fmt(cx)} ${fmt(cy - r - 1)} L ${fmt(cx + r + 1)} ${fmt(cy)} L ${fmt(cx)} ${fmt(cy + r + 1)} L ${fmt(cx - r - 1)} ${fmt(cy)} Z" fill="${color}"/>`;
  }
}

export interface RenderOptions {
  title?: string;
  footer?: string;
  xlim?: [number, number];
  ylim?: [number, number];
}

export function renderSvg(series: Series[], kind: FigureKind, opts: RenderOptions = {}): string {
  const width = 920;
  const height = 520;
  const plot = { left: 70, top: 48, right: 660, bottom: 450 };
  const legendX = plot.right + 28;

  const [x0, x1] = opts.xlim ?? extent(series, (p) => p.x);
  const padX = 0.04 * (x1 - x0);
  const xlo = opts.xlim ? x0 : x0 - padX;
  const xhi = opts.xlim ? x1 : x1 + padX;
  const [ylo, yhi] = opts.ylim ?? [0, 1.02];

  const sx = (v: number) => plot.left + ((v - xlo) / (xhi - xlo)) * (plot.right - plot.left);
  const sy = (v: number) => plot.bottom - ((v - ylo) / (yhi - ylo)) * (plot.bottom - plot.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);
  if (opts.title) {
    parts.push(
      `<text x="${(plot.left + plot.right) / 2}" y="28" text-anchor="middle" font-size="16">${escapeXml(opts.title)}</text>`,
    );
  }

  // axes, grid, ticks
  for (const tx of ticks(xlo, xhi)) {
    const px = sx(tx);
    parts.push(`<line x1="${fmt(px)}" y1="${plot.top}" x2="${fmt(px)}" y2="${plot.bottom}" stroke="#e0e0e0"/>`);
    parts.push(
      `<text x="${fmt(px)}" y="${plot.bottom + 18}" text-anchor="middle" font-size="11">${fmt(tx)}</text>`,
    );
  }
  for (const ty of ticks(ylo, yhi)) {
    const py = sy(ty);
    parts.push(`<line x1="${plot.left}" y1="${fmt(py)}" x2="${plot.right}" y2="${fmt(py)}" stroke="#e0e0e0"/>`);
    parts.push(
      `<text x="${plot.left - 8}" y="${fmt(py + 4)}" text-anchor="end" font-size="11">${fmt(ty)}</text>`,
    );
  }
  parts.push(
    `<rect x="${plot.left}" y="${plot.top}" width="${plot.right - plot.left}" height="${plot.bottom - plot.top}" fill="none" stroke="#333333"/>`,
  );
  parts.push(
    `<text x="${(plot.left + plot.right) / 2}" y="${plot.bottom + 40}" text-anchor="middle" font-size="13">${escapeXml(X_LABEL[kind])}</text>`,
  );
  parts.push(
    `<text x="22" y="${(plot.top + plot.bottom) / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 22 ${(plot.top + plot.bottom) / 2})">probability of detection</text>`,
  );

  // series
  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    const body: string[] = [];
    if (s.points.length > 1) {
      const pts = s.points.map((p) => `${fmt(sx(p.x))},${fmt(sy(p.y))}`).join(' ');
      body.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    }
    for (const p of s.points) {
      body.push(marker(sx(p.x), sy(p.y), i, color));
    }
    parts.push(`<g class="series" data-series="${escapeXml(s.key)}">${body.join('')}</g>`);
  });

  // legend
  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    const y = plot.top + 10 + i * 22;
    parts.push(`<g class="legend-entry" data-series="${escapeXml(s.key)}">`);
    parts.push(`<line x1="${legendX}" y1="${y}" x2="${legendX + 26}" y2="${y}" stroke="${color}" stroke-width="1.8"/>`);
    parts.push(marker(legendX + 13, y, i, color));
    parts.push(`<text x="${legendX + 34}" y="${y + 4}" font-size="11">${escapeXml(s.label)}</text>`);
    parts.push(`</g>`);
  });

  if (opts.footer) {
    parts.push(
      `<text x="${plot.left}" y="${height - 10}" font-size="9" fill="#888888">${escapeXml(opts.footer)}</text>`,
    );
  }
  parts.push('</svg>');
  return parts.join('\n');
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function footerText(inputs: string[], rows: SweepRow[]): string {
  const seeds = [...new Set(rows.map((r) => r.seed))];
  const seedPart = seeds.length === 1 ? `seed ${seeds[0]}` : `seeds ${seeds.length} rows`;
  // hash the run metadata when it sits next to the inputs, else the inputs
  const metaPath = path.join(path.dirname(inputs[0]), 'run_metadata.json');
  const hash = createHash('sha256');
  if (fs.existsSync(metaPath)) {
    hash.update(fs.readFileSync(metaPath));
  } else {
    for (const f of inputs) hash.update(fs.readFileSync(f));
  }
  return `${seedPart} | config ${hash.digest('hex').slice(0, 12)}`;
}

/**
 * Read the spec's CSV inputs, build the figure and write the image.
 * Nothing is written unless every input validates; the output format
 * follows the file extension (.svg or .png).
 */
export async function render(spec: FigureSpec): Promise<string> {
  if (!FIGURE_KINDS.includes(spec.kind)) {
    throw new CsvSchemaError(`unknown figure kind: ${spec.kind}`);
  }
  if (spec.inputs.length === 0) {
    throw new CsvSchemaError('no input CSV files given');
  }
  const rows: SweepRow[] = [];
  for (const file of spec.inputs) {
    rows.push(...parseSweepRows(fs.readFileSync(file, 'utf-8'), file));
  }
  const series = buildSeries(rows, spec.kind);
  const svg = renderSvg(series, spec.kind, {
    title: spec.title,
    footer: footerText(spec.inputs, rows),
    xlim: spec.xlim,
    ylim: spec.ylim,
  });
  const ext = path.extname(spec.output).toLowerCase();
  if (ext === '.svg') {
    fs.writeFileSync(spec.output, svg, 'utf-8');
  } else if (ext === '.png') {
    const { Resvg } = await import('@resvg/resvg-js');
    fs.writeFileSync(spec.output, new Resvg(svg).render().asPng());
  } else {
    throw new CsvSchemaError(`unsupported output extension: ${spec.output} (use .svg or .png)`);
  }
  return spec.output;
}
