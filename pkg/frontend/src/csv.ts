/**
 * CSV access for harness artifacts.
 *
 * The harness writes RFC-4180 CSV (CRLF rows, quoted fields where needed)
 * with fixed headers and 17-significant-digit floats. Tokenization is
 * papaparse; column access is by documented header name only, and float
 * fields are parsed strictly so a corrupt artifact fails loudly instead
 * of plotting garbage.
 */

import Papa from 'papaparse';
import { RenderError } from './errors.js';

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string, label: string): Table {
  const out = Papa.parse<string[]>(text, { skipEmptyLines: true });
  if (out.errors.length > 0) {
    const first = out.errors[0];
    throw new RenderError(`${label}: malformed CSV (${first.message} at row ${first.row})`);
  }
  const data = out.data;
  if (data.length === 0) {
    throw new RenderError(`${label}: empty CSV`);
  }
  const header = data[0];
  const rows = data.slice(1);
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new RenderError(
        `${label}: row has ${row.length} fields, header has ${header.length}`
      );
    }
  }
  return { header, rows };
}

export function columnIndex(table: Table, name: string, label: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new RenderError(`${label}: missing column '${name}' (have: ${table.header.join(', ')})`);
  }
  return idx;
}

// %.17g output: decimal or exponent form, plus nan / inf / -inf.
const FLOAT_RE = /^[+-]?(?:nan|inf|(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)$/;

export function parseFloatStrict(field: string, label: string): number {
  if (!FLOAT_RE.test(field)) {
    throw new RenderError(`${label}: '${field}' is not a float field`);
  }
  if (field === 'nan' || field === '-nan') return NaN;
  if (field === 'inf' || field === '+inf') return Infinity;
  if (field === '-inf') return -Infinity;
  return Number(field);
}

export function floatColumn(table: Table, name: string, label: string): number[] {
  const idx = columnIndex(table, name, label);
  return table.rows.map((row) => parseFloatStrict(row[idx], `${label}:${name}`));
}

export function intColumn(table: Table, name: string, label: string): number[] {
  const idx = columnIndex(table, name, label);
  return table.rows.map((row) => {
    const field = row[idx];
    if (!/^[+-]?\d+$/.test(field)) {
      throw new RenderError(`${label}:${name}: '${field}' is not an integer field`);
    }
    return Number(field);
  });
}

export function stringColumn(table: Table, name: string, label: string): string[] {
  const idx = columnIndex(table, name, label);
  return table.rows.map((row) => row[idx]);
}

/** Columns y0..y{d-1}, one point per row. Throws if y0 is absent. */
export function pointColumns(table: Table, label: string): number[][] {
  const indices: number[] = [];
  for (let i = 0; ; i++) {
    const idx = table.header.indexOf(`y${i}`);
    if (idx < 0) break;
    indices.push(idx);
  }
  if (indices.length === 0) {
    throw new RenderError(`${label}: no y0..y{d} point columns`);
  }
  return table.rows.map((row) =>
    indices.map((idx) => parseFloatStrict(row[idx], `${label}:y*`))
  );
}
