import init, { flat_spectrum, dn_demo, Evolution } from "./pkg/elastosheet_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 36;
  ctx.clearRect(0, 0, w, h);
  let xs = series.flatMap((s) => s.x), ys = series.flatMap((s) => s.y);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = opts.yrange ?? [Math.min(0, ...ys), Math.max(0, ...ys)];
  if (y1 - y0 < 1e-12) { y0 -= 1; y1 += 1; }
  const X = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const Y = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath(); ctx.moveTo(pad, Y(0)); ctx.lineTo(w - pad, Y(0)); ctx.stroke();
  ctx.fillStyle = "#555"; ctx.font = "11px monospace";
  ctx.fillText(y1.toPrecision(3), 2, pad - 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad + 12);
  ctx.fillText(x0.toPrecision(3), pad, h - 8);
  ctx.fillText(x1.toPrecision(3), w - pad - 30, h - 8);
  for (const s of series) {
    ctx.strokeStyle = s.color; ctx.lineWidth = s.width ?? 2;
    ctx.beginPath();
    s.x.forEach((x, i) => (i ? ctx.lineTo(X(x), Y(s.y[i])) : ctx.moveTo(X(x), Y(s.y[i]))));
    ctx.stroke();
  }
}

function showValues(ids) {
  for (const id of ids) $(id + "-v").textContent = $(id).value;
}

function updateSpectrum() {
  showValues(["sp-u", "sp-ap", "sp-am", "sp-rm"]);
  const kmax = 32;
  const out = flat_spectrum(num("sp-u"), num("sp-ap"), num("sp-am"), 1.0, num("sp-rm"), kmax);
  const k = [], growth = [], freq = [];
  for (let i = 0; i < kmax; i++) {
    const r = out.slice(5 * i, 5 * i + 5);
    k.push(r[0]);
    growth.push(Math.max(r[1], r[3]));
    freq.push(Math.max(Math.abs(r[2]), Math.abs(r[4])));
  }
  const lambda = out[5 * kmax];
  $("sp-lambda").textContent = lambda.toFixed(4);
  $("sp-verdict").textContent = lambda > 0 ? "(elasticity stabilizes the sheet)" : "(Kelvin–Helmholtz unstable)";
  plot($("sp-canvas"), [
    { x: k, y: growth, color: "#c0392b" },
    { x: k, y: freq, color: "#2c6fbb" },
  ]);
}

function updateDn() {
  showValues(["dn-amp", "dn-k"]);
  const n = 64, k = num("dn-k");
  const v = dn_demo(num("dn-amp"), k, n);
  const part = (j) => Array.from(v.slice(j * n, (j + 1) * n));
  const x = part(0);
  $("dn-flat").textContent = (k * Math.tanh(k)).toFixed(4);
  plot($("dn-canvas"), [
    { x, y: part(1), color: "#888", width: 1 },
    { x, y: part(2), color: "#222", width: 1 },
    { x, y: part(3), color: "#c0392b" },
    { x, y: part(4), color: "#2c6fbb" },
  ]);
}

let evo = null, running = false;

function restartEvolution() {
  showValues(["ev-u", "ev-a", "ev-k"]);
  $("ev-msg").textContent = "";
  try {
    evo?.free();
    evo = new Evolution(num("ev-u"), num("ev-a"), num("ev-k"), 0.01);
    running = true;
  } catch (e) {
    evo = null;
    $("ev-msg").textContent = String(e);
  }
}

function frame() {
  if (evo && running) {
    try {
      evo.advance(2);
    } catch (e) {
      running = false;
      $("ev-msg").textContent = String(e);
    }
    const f = Array.from(evo.interface());
    const x = f.map((_, i) => (2 * Math.PI * i) / f.length);
    const amp = Math.max(...f.map(Math.abs));
    $("ev-t").textContent = evo.time().toFixed(3);
    $("ev-lambda").textContent = evo.lambda().toFixed(4);
    $("ev-max").textContent = amp.toExponential(3);
    plot($("ev-canvas"), [{ x, y: f, color: "#2c6fbb" }], { yrange: [-Math.max(amp, 0.01), Math.max(amp, 0.01)] });
    if (amp > 0.8) {
      running = false;
      $("ev-msg").textContent = "interface approaches the lid; stopped";
    }
  }
  requestAnimationFrame(frame);
}

await init();
for (const id of ["sp-u", "sp-ap", "sp-am", "sp-rm"]) $(id).addEventListener("input", updateSpectrum);
for (const id of ["dn-amp", "dn-k"]) $(id).addEventListener("input", updateDn);
for (const id of ["ev-u", "ev-a", "ev-k"]) $(id).addEventListener("change", restartEvolution);
$("ev-start").addEventListener("click", restartEvolution);
$("ev-pause").addEventListener("click", () => { running = !running; });
updateSpectrum();
updateDn();
restartEvolution();
requestAnimationFrame(frame);
