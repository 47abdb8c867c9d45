#!/usr/bin/env node
/**
 * CLI: render --figure <id> --input <csv...> --out <path.svg>
 *
 * Reads simulator CSVs, builds the requested figure layout, and writes a
 * deterministic SVG (server-side echarts, no animation, fixed size and
 * fonts). Exits 1 on schema mismatches or unreadable inputs.
 */

import * as fs from "fs";
import * as path from "path";
import { parseArgs } from "util";

import * as echarts from "echarts";

import { SchemaError } from "./csv";
import { FIGURE_IDS, FigureId, buildFigure } from "./figures";

/** zrender bakes a process-global instance counter into SVG class names
 * and clip-path ids; strip it and renumber classes in first-appearance
 * order so the output depends only on the inputs. */
function canonicalizeSvgClasses(svg: string): string {
  const noInstance = svg.replace(/\bzr\d+-/g, "zr-");
  const seen = new Map<string, string>();
  return noInstance.replace(/zr-cls-\d+/g, (m) => {
    if (!seen.has(m)) seen.set(m, `zr-cls-${seen.size}`);
    return seen.get(m)!;
  });
}

export function renderToSvg(figure: FigureId, inputs: string[]): string {
  const built = buildFigure({ figure, inputs });
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: built.width,
    height: built.height,
  });
  try {
    chart.setOption(built.option);
    return canonicalizeSvgClasses(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

export function main(argv: string[]): number {
  let args;
  try {
    args = parseArgs({
      args: argv,
      options: {
        figure: { type: "string" },
        input: { type: "string", multiple: true },
        out: { type: "string" },
      },
    });
  } catch (err) {
    process.stderr.write(`argument error: ${(err as Error).message}\n`);
    return 1;
  }
  const { figure, input, out } = args.values;
  if (!figure || !input || input.length === 0 || !out) {
    process.stderr.write(
      "usage: render --figure <fig1-like|fig2-like|fig3-like|fig4-like|fig5-like>" +
        " --input <csv> [--input <csv> ...] --out <path.svg>\n"
    );
    return 1;
  }
  if (!(FIGURE_IDS as readonly string[]).includes(figure)) {
    process.stderr.write(`unknown figure '${figure}'; choose from ${FIGURE_IDS.join(", ")}\n`);
    return 1;
  }
  try {
    const svg = renderToSvg(figure as FigureId, input);
    fs.mkdirSync(path.dirname(path.resolve(out)), { recursive: true });
    fs.writeFileSync(out, svg);
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
    } else {
      process.stderr.write(`render error: ${(err as Error).message}\n`);
    }
    return 1;
  }
  process.stdout.write(`${out}\n`);
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
