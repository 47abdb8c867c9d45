/**
 * Reader for the simulator's CSV outputs.
 *
 * Both schemas carry a commented preamble (schema tag, code version, full
 * run config as JSON) followed by a pinned header row. Anything that does
 * not match the pinned schema fails loudly: the plot layer never guesses.
 */

import * as fs from "fs";

export const SERIES_SCHEMA = "kickedchain-series-v1";
export const MAP_SCHEMA = "kickedchain-map-v1";

export const SERIES_HEADER = [
  "t_over_T",
  "Sz_mean",
  "Sz_stderr",
  "ent_mean",
  "ent_stderr",
  "coh_mean",
  "coh_stderr",
  "qfi_mean",
  "qfi_stderr",
  "qfi_ratio",
];

export const MAP_HEADER = [
  "axis1",
  "axis2",
  "lifetime",
  "lifetime_is_capped",
  "ent_sat",
  "coh_sat",
  "max_qfi_ratio",
  "argmax_t",
];

export class SchemaError extends Error {}

export interface RunMeta {
  schema: string;
  version: string;
  config: Record<string, any>;
  axis1?: string;
  axis2?: string;
}

export interface Table {
  meta: RunMeta;
  /** column name -> values, row-aligned */
  columns: Map<string, number[]>;
  rows: number;
}

function parsePreamble(lines: string[], path: string): { meta: RunMeta; body: string[] } {
  const comments: string[] = [];
  const body: string[] = [];
  for (const line of lines) {
    if (line.startsWith("#")) comments.push(line.slice(1).trim());
    else if (line.trim().length > 0) body.push(line);
  }
  if (comments.length === 0) {
    throw new SchemaError(`${path}: missing metadata preamble`);
  }
  const schema = comments[0];
  if (schema !== SERIES_SCHEMA && schema !== MAP_SCHEMA) {
    throw new SchemaError(`${path}: unknown schema tag '${schema}'`);
  }
  const meta: RunMeta = { schema, version: "", config: {} };
  for (const c of comments.slice(1)) {
    const eq = c.indexOf("=");
    if (eq < 0) continue;
    const key = c.slice(0, eq).trim();
    const value = c.slice(eq + 1).trim();
    if (key === "version") meta.version = value;
    else if (key === "config") {
      try {
        meta.config = JSON.parse(value);
      } catch (err) {
        throw new SchemaError(`${path}: config preamble is not valid JSON`);
      }
    } else if (key === "axis1") meta.axis1 = value;
    else if (key === "axis2") meta.axis2 = value;
  }
  return { meta, body };
}

function parseNumber(text: string, path: string, line: number): number {
  if (text === "nan") return NaN;
  const v = Number(text);
  if (text.trim() === "" || Number.isNaN(v)) {
    throw new SchemaError(`${path}:${line}: non-numeric cell '${text}'`);
  }
  return v;
}

export function readTable(path: string, expected: "series" | "map"): Table {
  let raw: string;
  try {
    raw = fs.readFileSync(path, "utf-8");
  } catch (err) {
    throw new SchemaError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const { meta, body } = parsePreamble(raw.split(/\r?\n/), path);
  const wantSchema = expected === "series" ? SERIES_SCHEMA : MAP_SCHEMA;
  if (meta.schema !== wantSchema) {
    throw new SchemaError(`${path}: expected ${wantSchema}, found ${meta.schema}`);
  }
  const wantHeader = expected === "series" ? SERIES_HEADER : MAP_HEADER;
  if (body.length === 0) {
    throw new SchemaError(`${path}: no header row`);
  }
  const header = body[0].split(",");
  if (header.length !== wantHeader.length || header.some((h, i) => h !== wantHeader[i])) {
    throw new SchemaError(
      `${path}: header mismatch\n  expected: ${wantHeader.join(",")}\n  found:    ${body[0]}`
    );
  }
  const dataRows = body.slice(1);
  if (dataRows.length === 0) {
    throw new SchemaError(`${path}: empty series (no data rows)`);
  }
  const columns = new Map<string, number[]>(wantHeader.map((h) => [h, []]));
  dataRows.forEach((row, i) => {
    const cells = row.split(",");
    if (cells.length !== wantHeader.length) {
      throw new SchemaError(
        `${path}:${i + 2}: expected ${wantHeader.length} cells, found ${cells.length}`
      );
    }
    cells.forEach((cell, j) => columns.get(wantHeader[j])!.push(parseNumber(cell, path, i + 2)));
  });
  return { meta, columns, rows: dataRows.length };
}

/** Distinct values of a column, in first-appearance order. */
export function distinct(values: number[]): number[] {
  const out: number[] = [];
  for (const v of values) {
    if (!out.some((x) => x === v || (Number.isNaN(x) && Number.isNaN(v)))) out.push(v);
  }
  return out;
}
