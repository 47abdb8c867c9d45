/**
 * The five figure layouts, as echarts option builders over parsed tables.
 *
 * Layouts mirror the simulator's documented figure mapping:
 *  - fig1-like: magnetization / entanglement / coherence time series,
 *    one column per disorder strength (two series CSVs);
 *  - fig2-like, fig3-like: three heatmap panels (lifetime with log10
 *    color, entanglement and coherence saturation) from one 2-axis map;
 *  - fig4-like: SQL-normalized QFI curves, one panel per disorder
 *    strength, one curve per system size (series CSVs with QFI);
 *  - fig5-like: peak QFI ratio versus the first sweep axis, one curve
 *    per second-axis value, one panel per input map.
 *
 * Everything is fixed (size, fonts, palette), so a given CSV set renders
 * to an identical SVG every time.
 */

import { SchemaError, Table, distinct, readTable } from "./csv";

export const FIGURE_IDS = ["fig1-like", "fig2-like", "fig3-like", "fig4-like", "fig5-like"] as const;
export type FigureId = (typeof FIGURE_IDS)[number];

export interface FigureSpec {
  figure: FigureId;
  inputs: string[];
}

export interface BuiltFigure {
  width: number;
  height: number;
  option: Record<string, any>;
}

const PALETTE = ["#2f4b7c", "#d45087", "#ffa600", "#4daf68", "#a05195", "#665191"];
const FONT = { fontFamily: "sans-serif", fontSize: 11 };

function panelGrid(nRows: number, nCols: number, index: number) {
  const left = 7.5, right = 4.5, top = 5.5, bottom = 7.5, hGap = 7.5, vGap = 9;
  const w = (100 - left - right - hGap * (nCols - 1)) / nCols;
  const h = (100 - top - bottom - vGap * (nRows - 1)) / nRows;
  const row = Math.floor(index / nCols);
  const col = index % nCols;
  return {
    left: `${left + col * (w + hGap)}%`,
    top: `${top + row * (h + vGap)}%`,
    width: `${w}%`,
    height: `${h}%`,
  };
}

function axisPair(gridIndex: number, xName: string, yName: string, extra: any = {}) {
  const common = {
    gridIndex,
    nameTextStyle: FONT,
    axisLabel: { ...FONT },
    nameLocation: "middle",
  };
  return {
    xAxis: { type: "value", name: xName, nameGap: 22, ...common, ...(extra.x ?? {}) },
    yAxis: { type: "value", name: yName, nameGap: 34, ...common, ...(extra.y ?? {}) },
  };
}

function bandSeries(
  x: number[], mean: number[], err: number[], xi: number, yi: number, color: string, name: string
) {
  const lower = mean.map((m, i) => m - err[i]);
  const width = mean.map((m, i) => 2 * err[i]);
  return [
    {
      type: "line", name: `${name} band base`, xAxisIndex: xi, yAxisIndex: yi,
      data: x.map((t, i) => [t, lower[i]]), stack: `band-${xi}-${name}`,
      lineStyle: { opacity: 0 }, symbol: "none", silent: true, tooltip: { show: false },
    },
    {
      type: "line", name: `${name} band`, xAxisIndex: xi, yAxisIndex: yi,
      data: x.map((t, i) => [t, width[i]]), stack: `band-${xi}-${name}`,
      lineStyle: { opacity: 0 }, symbol: "none", silent: true,
      areaStyle: { color, opacity: 0.18 },
    },
    {
      type: "line", name, xAxisIndex: xi, yAxisIndex: yi,
      data: x.map((t, i) => [t, mean[i]]),
      lineStyle: { color, width: 1.4 }, itemStyle: { color }, symbol: "none",
    },
  ];
}

function requireInputs(spec: FigureSpec, min: number, max: number, kind: string) {
  if (spec.inputs.length < min || spec.inputs.length > max) {
    const range = min === max ? `${min}` : `${min}..${max}`;
    throw new SchemaError(
      `${spec.figure} needs ${range} ${kind} input file(s), got ${spec.inputs.length}`
    );
  }
}

function paramOf(t: Table, key: string): number {
  const params = t.meta.config?.params ?? {};
  const v = params[key];
  return typeof v === "number" ? v : NaN;
}

function buildFig1(spec: FigureSpec): BuiltFigure {
  requireInputs(spec, 2, 2, "series");
  const tables = spec.inputs.map((p) => readTable(p, "series"));
  tables.sort((a, b) => paramOf(a, "h") - paramOf(b, "h"));
  const rows: Array<[string, string, string]> = [
    ["Sz_mean", "Sz_stderr", "magnetization"],
    ["ent_mean", "ent_stderr", "entanglement (bits)"],
    ["coh_mean", "coh_stderr", "coherence (bits)"],
  ];
  const grids: any[] = [];
  const xAxes: any[] = [];
  const yAxes: any[] = [];
  const series: any[] = [];
  const titles: any[] = [];
  rows.forEach(([meanCol, errCol, label], r) => {
    tables.forEach((t, c) => {
      const idx = r * 2 + c;
      grids.push(panelGrid(3, 2, idx));
      const ax = axisPair(idx, "t/T", label);
      xAxes.push(ax.xAxis);
      yAxes.push(ax.yAxis);
      const x = t.columns.get("t_over_T")!;
      series.push(
        ...bandSeries(x, t.columns.get(meanCol)!, t.columns.get(errCol)!, idx, idx,
          PALETTE[c], `h=${paramOf(t, "h")}`)
      );
      if (r === 0) {
        titles.push({
          text: `h = ${paramOf(t, "h")}, N = ${paramOf(t, "N")}`,
          textStyle: { ...FONT, fontSize: 12 },
          left: grids[idx].left, top: "1%",
        });
      }
    });
  });
  return {
    width: 860, height: 980,
    option: { animation: false, title: titles, grid: grids, xAxis: xAxes, yAxis: yAxes, series },
  };
}

function heatPanel(
  t: Table, valueCol: string, idx: number, title: string,
  opts: { log?: boolean; annotateCapped?: boolean } = {}
) {
  const a1 = t.columns.get("axis1")!;
  const a2 = t.columns.get("axis2")!;
  const vals1 = distinct(a1);
  const vals2 = distinct(a2);
  const raw = t.columns.get(valueCol)!;
  const capped = t.columns.get("lifetime_is_capped")!;
  const data: any[] = [];
  let lo = Infinity, hi = -Infinity;
  raw.forEach((v, i) => {
    const shown = opts.log ? Math.log10(Math.max(v, 1)) : v;
    if (Number.isFinite(shown)) {
      lo = Math.min(lo, shown);
      hi = Math.max(hi, shown);
    }
    const item: any = { value: [vals1.indexOf(a1[i]), vals2.indexOf(a2[i]), shown] };
    if (opts.annotateCapped && capped[i] === 1) {
      // capped lifetimes are lower bounds; pin them to the top color and say so
      item.label = { show: true, formatter: "≥", color: "#fff", ...FONT };
    }
    data.push(item);
  });
  if (!Number.isFinite(lo)) {
    lo = 0;
    hi = 1;
  }
  const fmt = (v: number) => (Math.round(v * 1000) / 1000).toString();
  return {
    grid: panelGrid(1, 3, idx),
    xAxis: {
      type: "category", gridIndex: idx, name: t.meta.axis1 ?? "axis1", nameLocation: "middle",
      nameGap: 22, data: vals1.map(fmt), axisLabel: { ...FONT, interval: 1 }, nameTextStyle: FONT,
    },
    yAxis: {
      type: "category", gridIndex: idx, name: idx === 0 ? t.meta.axis2 ?? "axis2" : "",
      nameLocation: "middle", nameGap: 34, data: vals2.map(fmt),
      axisLabel: FONT, nameTextStyle: FONT,
    },
    visualMap: {
      type: "continuous", min: lo, max: hi, seriesIndex: idx, show: true,
      orient: "horizontal", left: panelGrid(1, 3, idx).left, bottom: 0,
      itemWidth: 10, itemHeight: 80, textStyle: FONT, precision: 2,
      inRange: { color: ["#15104b", "#2f4b7c", "#d45087", "#ffa600"] },
    },
    series: {
      type: "heatmap", name: title, xAxisIndex: idx, yAxisIndex: idx, data,
      progressive: 0,
    },
    title: {
      text: title, left: panelGrid(1, 3, idx).left, top: "0.5%",
      textStyle: { ...FONT, fontSize: 12 },
    },
  };
}

function buildHeatTriplet(spec: FigureSpec): BuiltFigure {
  requireInputs(spec, 1, 1, "map");
  const t = readTable(spec.inputs[0], "map");
  if (t.meta.axis2 === "none" || t.columns.get("axis2")!.every(Number.isNaN)) {
    throw new SchemaError(`${spec.figure} needs a 2-axis map (axis2 present)`);
  }
  const panels = [
    heatPanel(t, "lifetime", 0, "lifetime log10(t*)", { log: true, annotateCapped: true }),
    heatPanel(t, "ent_sat", 1, "entanglement saturation"),
    heatPanel(t, "coh_sat", 2, "coherence saturation"),
  ];
  return {
    width: 1200, height: 420,
    option: {
      animation: false,
      title: panels.map((p) => p.title),
      grid: panels.map((p) => p.grid),
      xAxis: panels.map((p) => p.xAxis),
      yAxis: panels.map((p) => p.yAxis),
      visualMap: panels.map((p) => p.visualMap),
      series: panels.map((p) => p.series),
    },
  };
}

function buildFig4(spec: FigureSpec): BuiltFigure {
  requireInputs(spec, 1, 12, "series");
  const tables = spec.inputs.map((p) => readTable(p, "series"));
  for (const [i, t] of tables.entries()) {
    if (t.columns.get("qfi_mean")!.every(Number.isNaN)) {
      throw new SchemaError(`${spec.inputs[i]}: no QFI columns (run with the AC probe enabled)`);
    }
  }
  const hs = distinct(tables.map((t) => paramOf(t, "h"))).sort((a, b) => a - b);
  const grids: any[] = [];
  const xAxes: any[] = [];
  const yAxes: any[] = [];
  const series: any[] = [];
  const titles: any[] = [];
  hs.forEach((h, idx) => {
    grids.push(panelGrid(1, hs.length, idx));
    const ax = axisPair(idx, "t/T", "F / N (2t/pi)^2");
    xAxes.push(ax.xAxis);
    yAxes.push(ax.yAxis);
    titles.push({
      text: `h = ${h}`, left: grids[idx].left, top: "1%",
      textStyle: { ...FONT, fontSize: 12 },
    });
    const group = tables
      .filter((t) => paramOf(t, "h") === h)
      .sort((a, b) => paramOf(a, "N") - paramOf(b, "N"));
    group.forEach((t, j) => {
      const x = t.columns.get("t_over_T")!;
      const y = t.columns.get("qfi_ratio")!;
      series.push({
        type: "line", name: `N=${paramOf(t, "N")}`, xAxisIndex: idx, yAxisIndex: idx,
        data: x.map((tt, i) => [tt, y[i]]),
        lineStyle: { color: PALETTE[j % PALETTE.length], width: 1.4 },
        itemStyle: { color: PALETTE[j % PALETTE.length] }, symbol: "none",
      });
    });
  });
  return {
    width: 430 * hs.length + 40, height: 390,
    option: {
      animation: false, title: titles, grid: grids, xAxis: xAxes, yAxis: yAxes, series,
      legend: { right: 8, top: 2, textStyle: FONT },
    },
  };
}

function buildFig5(spec: FigureSpec): BuiltFigure {
  requireInputs(spec, 1, 3, "map");
  const tables = spec.inputs.map((p) => readTable(p, "map"));
  for (const [i, t] of tables.entries()) {
    if (t.columns.get("max_qfi_ratio")!.every(Number.isNaN)) {
      throw new SchemaError(`${spec.inputs[i]}: no QFI ratios in map (sweep with the AC probe)`);
    }
  }
  const grids: any[] = [];
  const xAxes: any[] = [];
  const yAxes: any[] = [];
  const series: any[] = [];
  const titles: any[] = [];
  tables.forEach((t, idx) => {
    grids.push(panelGrid(1, tables.length, idx));
    const ax = axisPair(idx, t.meta.axis1 ?? "axis1", "max_t F / N (2t/pi)^2");
    xAxes.push(ax.xAxis);
    yAxes.push(ax.yAxis);
    const a1 = t.columns.get("axis1")!;
    const a2 = t.columns.get("axis2")!;
    const y = t.columns.get("max_qfi_ratio")!;
    const groups = distinct(a2);
    groups.forEach((g, j) => {
      const mask = a2.map((v, i) => (Number.isNaN(g) ? Number.isNaN(v) : v === g));
      const name = Number.isNaN(g) ? "sweep" : `${t.meta.axis2}=${g}`;
      series.push({
        type: "line", name: `${idx}:${name}`, xAxisIndex: idx, yAxisIndex: idx,
        data: a1.map((v, i) => [v, y[i]]).filter((_, i) => mask[i]),
        lineStyle: { color: PALETTE[j % PALETTE.length], width: 1.4 },
        itemStyle: { color: PALETTE[j % PALETTE.length] },
        symbol: "circle", symbolSize: 4,
      });
    });
    titles.push({
      text: `peak QFI ratio vs ${t.meta.axis1}`, left: grids[idx].left, top: "1%",
      textStyle: { ...FONT, fontSize: 12 },
    });
  });
  return {
    width: 430 * tables.length + 40, height: 390,
    option: {
      animation: false, title: titles, grid: grids, xAxis: xAxes, yAxis: yAxes, series,
      legend: { right: 8, top: 2, textStyle: FONT },
    },
  };
}

export function buildFigure(spec: FigureSpec): BuiltFigure {
  switch (spec.figure) {
    case "fig1-like":
      return buildFig1(spec);
    case "fig2-like":
    case "fig3-like":
      return buildHeatTriplet(spec);
    case "fig4-like":
      return buildFig4(spec);
    case "fig5-like":
      return buildFig5(spec);
    default:
      throw new SchemaError(
        `unknown figure id '${(spec as any).figure}'; choose from ${FIGURE_IDS.join(", ")}`
      );
  }
}
