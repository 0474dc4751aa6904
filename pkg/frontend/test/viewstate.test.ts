import { describe, expect, it } from "vitest";

import type { ModelDoc, StateEvent } from "../src/protocol.js";
import {
  HISTORY_CAPACITY,
  ViewState,
  historyMatchesCsv,
} from "../src/viewstate.js";

function tinyModel(): ModelDoc {
  return {
    nodes: [
      { id: 0, pos: [0, 0, 0], fixed: true },
      { id: 5, pos: [1, 0, 0], fixed: false },
      { id: 2, pos: [0, 1, 0], fixed: false },
    ],
    elements: [
      { id: 0, kind: "line", nodes: [0, 5], role: "functional", weight: 1, power: 2 },
    ],
    loads: [],
    solver: {
      method: "three_term",
      alpha: 0.2,
      damping: 0.98,
      constraint_relax: 0.5,
      max_steps: 100,
      grad_tol: 1e-3,
      residual_tol: 1e-6,
    },
  };
}

function stateAt(step: number, gradNorm = 1.0, pi?: number): StateEvent {
  return {
    event: "state",
    step,
    grad_norm: gradNorm,
    residual_norm: 0,
    alpha: 0.2,
    positions: [
      [0.5, 1.5, 2.5],
      [3.5, 4.5, 5.5],
    ],
    ...(pi === undefined ? {} : { pi }),
  };
}

describe("view state", () => {
  it("merges fixed model positions with streamed free positions", () => {
    const view = new ViewState();
    view.apply({ event: "model_loaded", counts: {}, model: tinyModel() });
    // free ids ascending: 2 then 5
    view.apply(stateAt(1));
    const positions = view.positionsById();
    expect(positions.get(0)).toEqual([0, 0, 0]);
    expect(positions.get(2)).toEqual([0.5, 1.5, 2.5]);
    expect(positions.get(5)).toEqual([3.5, 4.5, 5.5]);
  });

  it("keeps the rolling buffer bounded and append-only until cleared", () => {
    const view = new ViewState();
    for (let s = 0; s < HISTORY_CAPACITY + 50; s++) view.apply(stateAt(s));
    expect(view.history.length).toBe(HISTORY_CAPACITY);
    expect(view.history[0].step).toBe(50);
    expect(view.history[view.history.length - 1].step).toBe(HISTORY_CAPACITY + 49);
    view.clearHistory();
    expect(view.history.length).toBe(0);
  });

  it("tracks pending commands through acks and errors", () => {
    const view = new ViewState();
    view.commandSent();
    view.commandSent();
    expect(view.pendingCommands).toBe(2);
    view.apply({ event: "ack", command: "start", step: 0 });
    expect(view.pendingCommands).toBe(1);
    view.apply({ event: "error", message: "alpha must be > 0" });
    expect(view.pendingCommands).toBe(0);
    expect(view.lastError).toMatch(/alpha/);
    view.apply({ event: "ack", command: "pause", step: 3 });
    expect(view.lastError).toBeNull();
  });

  it("records and clears convergence", () => {
    const view = new ViewState();
    view.apply({ event: "converged", step: 321 });
    expect(view.converged).toBe(321);
    view.apply({ event: "model_loaded", counts: {}, model: tinyModel() });
    expect(view.converged).toBeNull();
  });

  it("decimates for plotting but keeps raw points", () => {
    const view = new ViewState();
    for (let s = 0; s < 1000; s++) view.apply(stateAt(s));
    const plot = view.decimated(100);
    expect(plot.length).toBeLessThanOrEqual(101);
    expect(plot[plot.length - 1].step).toBe(999);
    expect(view.history.length).toBe(1000);
  });
});

describe("csv cross-check", () => {
  it("matches a server-format csv including python exponent spellings", () => {
    const view = new ViewState();
    view.apply(stateAt(0, 678.2956509644162, 1508.3374306813864));
    view.apply(stateAt(1, 1e-7, 2.5));
    // pi column empty for objective-free runs on the server side; here both
    // rows carry an objective, written the way python repr() would
    const csv = [
      "step,pi,grad_norm,residual_norm,alpha",
      "0,1508.3374306813864,678.2956509644162,0.0,0.2",
      "1,2.5,1e-07,0.0,0.2",
    ].join("\n");
    expect(historyMatchesCsv(view.history, csv)).toBe(true);
  });

  it("flags value drift", () => {
    const view = new ViewState();
    view.apply(stateAt(0, 1.5, 10));
    const csv = [
      "step,pi,grad_norm,residual_norm,alpha",
      "0,10.000000001,1.5,0.0,0.2",
    ].join("\n");
    expect(historyMatchesCsv(view.history, csv)).toBe(false);
  });

  it("handles objective-free rows", () => {
    const view = new ViewState();
    view.apply(stateAt(4, 0.25));
    const csv = ["step,pi,grad_norm,residual_norm,alpha", "4,,0.25,0.0,0.2"].join("\n");
    expect(historyMatchesCsv(view.history, csv)).toBe(true);
  });
});
