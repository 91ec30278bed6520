/**
 * Reader for isacsim sweep CSVs.
 *
 * Expected header (RFC-4180 style, '.' decimals):
 *   sweep_param_name, sweep_value, policy, policy_param,
 *   p_d, p_fa_window, mean_snr_db, mean_m, n_trials, seed
 */

export class CsvSchemaError extends Error {}

export interface SweepRow {
  sweepParamName: string;
  sweepValue: number;
  policy: string;
  policyParam: number | null;
  pD: number;
  pFaWindow: number;
  meanSnrDb: number;
  meanM: number;
  nTrials: number;
  /** 64-bit seed, kept as text to avoid precision loss */
  seed: string;
}

export const REQUIRED_COLUMNS = [
  'sweep_param_name',
  'sweep_value',
  'policy',
  'policy_param',
  'p_d',
  'p_fa_window',
  'mean_snr_db',
  'mean_m',
  'n_trials',
  'seed',
] as const;

/** Minimal RFC-4180 parser: quoted fields, doubled quotes, CRLF or LF. */
export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let field = '';
  let row: string[] = [];
  let inQuotes = false;
  for (let i = 0; i < text.length; i++) {
    const c = text[i];
    if (inQuotes) {
      if (c === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          inQuotes = false;
        }
      } else {
        field += c;
      }
    } else if (c === '"') {
      inQuotes = true;
    } else if (c === ',') {
      row.push(field);
      field = '';
    } else if (c === '\n' || c === '\r') {
      if (c === '\r' && text[i + 1] === '\n') i++;
      row.push(field);
      field = '';
      rows.push(row);
      row = [];
    } else {
      field += c;
    }
  }
  if (field.length > 0 || row.length > 0) {
    row.push(field);
    rows.push(row);
  }
  return rows;
}

function toNumber(value: string, file: string, column: string, line: number): number {
  const v = value.trim().toLowerCase();
  if (v === 'nan' || v === '') return NaN;
  const num = Number(value);
  if (Number.isNaN(num)) {
    throw new CsvSchemaError(`${file}:${line}: column ${column}: not a number: ${value}`);
  }
  return num;
}

export function parseSweepRows(text: string, file: string): SweepRow[] {
  const table = parseCsv(text).filter((r) => !(r.length === 1 && r[0] === ''));
  if (table.length === 0) {
    throw new CsvSchemaError(`${file}: empty file`);
  }
  const header = table[0].map((h) => h.trim());
  const missing = REQUIRED_COLUMNS.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new CsvSchemaError(`${file}: missing column(s): ${missing.join(', ')}`);
  }
  const col = (name: string) => header.indexOf(name);
  const rows: SweepRow[] = [];
  for (let i = 1; i < table.length; i++) {
    const rec = table[i];
    if (rec.length < header.length) {
      throw new CsvSchemaError(`${file}:${i + 1}: expected ${header.length} fields, got ${rec.length}`);
    }
    const paramRaw = rec[col('policy_param')].trim();
    rows.push({
      sweepParamName: rec[col('sweep_param_name')].trim(),
      sweepValue: toNumber(rec[col('sweep_value')], file, 'sweep_value', i + 1),
      policy: rec[col('policy')].trim(),
      policyParam: paramRaw === '' ? null : toNumber(paramRaw, file, 'policy_param', i + 1),
      pD: toNumber(rec[col('p_d')], file, 'p_d', i + 1),
      pFaWindow: toNumber(rec[col('p_fa_window')], file, 'p_fa_window', i + 1),
      meanSnrDb: toNumber(rec[col('mean_snr_db')], file, 'mean_snr_db', i + 1),
      meanM: toNumber(rec[col('mean_m')], file, 'mean_m', i + 1),
      nTrials: toNumber(rec[col('n_trials')], file, 'n_trials', i + 1),
      seed: rec[col('seed')].trim(),
    });
  }
  if (rows.length === 0) {
    throw new CsvSchemaError(`${file}: no data rows`);
  }
  return rows;
}
