import { execFileSync, spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { describe, expect, it } from "vitest";

import { SchemaError } from "../src/csv";
import { buildFigure } from "../src/figures";
import { renderToSvg } from "../src/render";

const FIXTURES = path.join(__dirname, "fixtures");
const H1_N4 = path.join(FIXTURES, "ensemble_N4_h1_60b562de.csv");
const H1_N5 = path.join(FIXTURES, "ensemble_N5_h1_b0736ff0.csv");
const H7_N4 = path.join(FIXTURES, "ensemble_N4_h7_474c6c60.csv");
const H7_N5 = path.join(FIXTURES, "ensemble_N5_h7_6cbd14d5.csv");
const MAP = path.join(FIXTURES, "sweep_h-phi_f9e660d4.csv");

const CLI = path.join(__dirname, "..", "dist", "render.js");

function tmpDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "render-"));
}

describe("figure builders", () => {
  it("fig1-like builds six panels from two disorder strengths", () => {
    const built = buildFigure({ figure: "fig1-like", inputs: [H1_N4, H7_N4] });
    expect(built.option.grid).toHaveLength(6);
    expect(built.option.series.length).toBe(18); // 3 series per band x 6 panels
  });

  it("fig1-like refuses a single input", () => {
    expect(() => buildFigure({ figure: "fig1-like", inputs: [H1_N4] })).toThrow(SchemaError);
  });

  it("fig2-like and fig3-like build three heatmaps", () => {
    for (const figure of ["fig2-like", "fig3-like"] as const) {
      const built = buildFigure({ figure, inputs: [MAP] });
      expect(built.option.series).toHaveLength(3);
      expect(built.option.series[0].type).toBe("heatmap");
      expect(built.option.visualMap).toHaveLength(3);
    }
  });

  it("fig2-like refuses series input", () => {
    expect(() => buildFigure({ figure: "fig2-like", inputs: [H1_N4] })).toThrow(SchemaError);
  });

  it("capped lifetime cells carry the lower-bound annotation", () => {
    const built = buildFigure({ figure: "fig2-like", inputs: [MAP] });
    const lifetimes = built.option.series[0].data as any[];
    const annotated = lifetimes.filter((d) => d.label?.formatter === "≥");
    expect(annotated.length).toBeGreaterThan(0); // the pFTC corner is capped
  });

  it("fig4-like groups panels by disorder and curves by size", () => {
    const built = buildFigure({
      figure: "fig4-like",
      inputs: [H1_N4, H1_N5, H7_N4, H7_N5],
    });
    expect(built.option.grid).toHaveLength(2); // h = 1 and h = 7 panels
    expect(built.option.series).toHaveLength(4);
    expect(built.option.series.map((s: any) => s.name)).toContain("N=4");
  });

  it("fig5-like draws one curve per second-axis value", () => {
    const built = buildFigure({ figure: "fig5-like", inputs: [MAP] });
    expect(built.option.series).toHaveLength(3); // three phi values
  });
});

describe("svg rendering", () => {
  it("renders every figure id to a valid svg", () => {
    const cases: Array<[any, string[]]> = [
      ["fig1-like", [H1_N4, H7_N4]],
      ["fig2-like", [MAP]],
      ["fig3-like", [MAP]],
      ["fig4-like", [H1_N4, H1_N5, H7_N4, H7_N5]],
      ["fig5-like", [MAP]],
    ];
    for (const [figure, inputs] of cases) {
      const svg = renderToSvg(figure, inputs);
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg).toContain("</svg>");
    }
  });

  it("is deterministic across repeated in-process renders", () => {
    const a = renderToSvg("fig2-like", [MAP]);
    const b = renderToSvg("fig2-like", [MAP]);
    expect(a).toBe(b);
  });
});

describe("render CLI", () => {
  it("renders all five layouts with byte-identical reruns", () => {
    const dir = tmpDir();
    const cases: Array<[string, string[]]> = [
      ["fig1-like", [H1_N4, H7_N4]],
      ["fig2-like", [MAP]],
      ["fig3-like", [MAP]],
      ["fig4-like", [H1_N4, H1_N5, H7_N4, H7_N5]],
      ["fig5-like", [MAP]],
    ];
    for (const [figure, inputs] of cases) {
      const out1 = path.join(dir, `${figure}-a.svg`);
      const out2 = path.join(dir, `${figure}-b.svg`);
      const args = (out: string) => [
        CLI, "--figure", figure, ...inputs.flatMap((i) => ["--input", i]), "--out", out,
      ];
      execFileSync("node", args(out1));
      execFileSync("node", args(out2));
      const a = fs.readFileSync(out1);
      const b = fs.readFileSync(out2);
      expect(a.length).toBeGreaterThan(1000);
      expect(a.equals(b)).toBe(true);
    }
  });

  it("exits nonzero on schema mismatch", () => {
    const out = path.join(tmpDir(), "x.svg");
    const r = spawnSync("node", [CLI, "--figure", "fig2-like", "--input", H1_N4, "--out", out]);
    expect(r.status).not.toBe(0);
    expect(r.stderr.toString()).toContain("schema error");
    expect(fs.existsSync(out)).toBe(false);
  });

  it("exits nonzero on an empty csv", () => {
    const dir = tmpDir();
    const empty = path.join(dir, "empty.csv");
    fs.writeFileSync(empty, "");
    const r = spawnSync("node", [
      CLI, "--figure", "fig1-like", "--input", empty, "--input", empty,
      "--out", path.join(dir, "x.svg"),
    ]);
    expect(r.status).not.toBe(0);
  });

  it("exits nonzero on bad flags", () => {
    const r = spawnSync("node", [CLI, "--figure", "fig9-like", "--input", MAP, "--out", "x.svg"]);
    expect(r.status).not.toBe(0);
  });
});
