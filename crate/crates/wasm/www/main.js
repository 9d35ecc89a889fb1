import init, { default_params, losses, surplus_curve, mde_curve } from "./pkg/milkfever_wasm.js";

const $ = (id) => document.getElementById(id);

function slider(parent, name, min, max, step, value, onInput) {
  const row = document.createElement("div");
  const label = document.createElement("label");
  const input = document.createElement("input");
  const out = document.createElement("span");
  Object.assign(input, { type: "range", min, max, step, value });
  label.textContent = name;
  out.textContent = " " + value;
  input.addEventListener("input", () => {
    out.textContent = " " + input.value;
    onInput();
  });
  row.append(label, input, out);
  parent.append(row);
  return () => Number(input.value);
}

// Line chart with axes; points are [{x, y}].
function lineChart(canvas, points, xLabel, yLabel) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 50;
  ctx.clearRect(0, 0, w, h);
  const xs = points.map((p) => p.x), ys = points.map((p) => p.y);
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const y1 = Math.max(...ys) || 1;
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad + 10 - (y / y1) * (h - 2 * pad);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad - 10);
  ctx.lineTo(pad, h - pad + 10);
  ctx.lineTo(w - pad, h - pad + 10);
  ctx.stroke();
  ctx.strokeStyle = "#1f5fa8";
  ctx.lineWidth = 2;
  ctx.beginPath();
  points.forEach((p, i) => (i ? ctx.lineTo(px(p.x), py(p.y)) : ctx.moveTo(px(p.x), py(p.y))));
  ctx.stroke();
  ctx.lineWidth = 1;
  ctx.fillStyle = "#222";
  ctx.font = "12px system-ui";
  ctx.fillText(xLabel, w / 2 - 40, h - 8);
  ctx.fillText(yLabel, 4, 14);
  ctx.fillText(x0.toString(), pad - 4, h - pad + 24);
  ctx.fillText(x1.toString(), w - pad - 10, h - pad + 24);
  ctx.fillText(y1.toFixed(2), 4, pad);
}

function lossBars(canvas, columns) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  const parts = [["milk_value_loss", "#1f5fa8"], ["treatment_cost", "#e0a030"], ["mortality_loss", "#b03030"]];
  const max = Math.max(...columns.map((c) => c.total)) || 1;
  const bw = (w - 40) / columns.length;
  ctx.font = "11px system-ui";
  columns.forEach((c, i) => {
    let y = h - 30;
    for (const [key, colour] of parts) {
      const bh = (c[key] / max) * (h - 60);
      ctx.fillStyle = colour;
      ctx.fillRect(20 + i * bw + 10, y - bh, bw - 20, bh);
      y -= bh;
    }
    ctx.fillStyle = "#222";
    ctx.fillText(c.label, 20 + i * bw + 10, h - 14);
    ctx.fillText(c.total.toFixed(2), 20 + i * bw + 10, y - 4);
  });
  parts.forEach(([key, colour], i) => {
    ctx.fillStyle = colour;
    ctx.fillRect(w - 170, 10 + i * 16, 10, 10);
    ctx.fillStyle = "#222";
    ctx.fillText(key.replace(/_/g, " "), w - 155, 19 + i * 16);
  });
}

function showError(el, e) {
  el.textContent = String(e.message ?? e);
  el.className = "err";
}

function computeLosses() {
  const out = $("losses");
  try {
    const r = JSON.parse(losses($("params").value, $("unit").value));
    out.className = "";
    out.textContent = r.table;
    lossBars($("loss-bars"), r.columns);
  } catch (e) {
    showError(out, e);
  }
}

let market;
function computeSurplus() {
  const out = $("surplus");
  try {
    const r = JSON.parse(surplus_curve(market.e(), -market.eta(), market.price(), market.q0(), market.loss(), market.success(), 20));
    out.className = "";
    out.textContent =
      `K = ${r.supply_shift.toFixed(3)}   Z = ${r.price_reduction.toFixed(3)}   ` +
      `supply change = ${(100 * r.pct_supply_change).toFixed(2)}%   gain at full adoption = ${r.full_gain_crore.toFixed(1)} crore`;
    lineChart($("adoption"), r.curve.map((p) => ({ x: p.adoption_rate, y: p.gain })), "adoption rate", "gain (crore)");
  } catch (e) {
    showError(out, e);
  }
}

let power;
function computePower() {
  const out = $("power");
  try {
    const pts = JSON.parse(mde_curve(power.alpha(), power.power(), power.p(), power["var"](), 20, power.nmax(), 60));
    out.className = "";
    const last = pts[pts.length - 1];
    out.textContent = `MDE at N = ${last.n}: ${last.mde.toFixed(4)}`;
    lineChart($("mde"), pts.map((p) => ({ x: p.n, y: p.mde })), "sample size N", "MDE");
  } catch (e) {
    showError(out, e);
  }
}

await init();
$("params").value = default_params();
$("compute").addEventListener("click", computeLosses);
$("unit").addEventListener("change", computeLosses);

const mc = $("market-controls");
market = {
  e: slider(mc, "supply elasticity", 0.005, 0.5, 0.001, 0.019, computeSurplus),
  eta: slider(mc, "|demand elasticity|", 0.1, 3, 0.005, 1.035, computeSurplus),
  price: slider(mc, "milk price (₹/L)", 10, 80, 0.5, 37.5, computeSurplus),
  q0: slider(mc, "production (t)", 100000, 3000000, 1000, 1200584, computeSurplus),
  loss: slider(mc, "milk loss (t)", 0, 400000, 100, 154499, computeSurplus),
  success: slider(mc, "success rate", 0, 1, 0.01, 0.9, computeSurplus),
};

const pc = $("power-controls");
power = {
  alpha: slider(pc, "t for significance", 1, 3, 0.01, 1.96, computePower),
  power: slider(pc, "t for power", 0, 3, 0.01, 0.84, computePower),
  p: slider(pc, "treated share", 0.05, 0.95, 0.05, 0.5, computePower),
  var: slider(pc, "outcome variance", 0.1, 5, 0.1, 1, computePower),
  nmax: slider(pc, "largest N", 100, 2000, 10, 800, computePower),
};

computeLosses();
computeSurplus();
computePower();
