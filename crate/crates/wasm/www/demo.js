import init, { simulatePopularity, detectPeaks, spikeScores, analyze } from "./pkg/sb_meme_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const out = (text) => { $("out").textContent = text; };

let overlay = {};

function parseValues() {
  const vals = $("values").value.split(/[\s,]+/).filter((s) => s.length).map(Number);
  if (vals.some((v) => !Number.isFinite(v) || v < 0)) throw new Error("values must be non-negative numbers");
  return Float64Array.from(vals);
}

// Knuth's method is fine for the small means used here.
function poisson(lambda) {
  if (lambda > 500) return Math.max(0, Math.round(lambda + Math.sqrt(lambda) * gauss()));
  const l = Math.exp(-lambda);
  let k = 0, p = 1;
  do { k++; p *= Math.random(); } while (p > l);
  return k - 1;
}

function gauss() {
  const u = 1 - Math.random(), v = Math.random();
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
}

function draw(values) {
  const c = $("plot"), g = c.getContext("2d");
  const W = c.width, H = c.height, pad = 50;
  g.clearRect(0, 0, W, H);
  const n = values.length;
  if (n < 2) return;
  let top = Math.max(...values);
  if (overlay.sim) top = Math.max(top, ...overlay.sim);
  top = top > 0 ? top * 1.05 : 1;
  const x = (t) => pad + (t / (n - 1)) * (W - 2 * pad);
  const y = (v) => H - pad - (v / top) * (H - 2 * pad);

  g.strokeStyle = "#ccc"; g.lineWidth = 1;
  g.beginPath(); g.moveTo(pad, pad); g.lineTo(pad, H - pad); g.lineTo(W - pad, H - pad); g.stroke();
  g.fillStyle = "#555"; g.font = "22px sans-serif";
  g.fillText(top.toFixed(1), 4, pad + 8); g.fillText("0", 20, H - pad);
  g.fillText(String(n - 1), W - pad - 20, H - pad + 28);

  if (overlay.stamps) {
    const names = ["t0", "ta1", "t1", "tf1", "ta2", "t2", "tf2", "T"];
    g.strokeStyle = "#999"; g.setLineDash([6, 6]);
    overlay.stamps.forEach((t, i) => {
      g.beginPath(); g.moveTo(x(t), pad); g.lineTo(x(t), H - pad); g.stroke();
      g.fillText(names[i], x(t) + 3, pad + 22 + (i % 2) * 24);
    });
    g.setLineDash([]);
  }

  const line = (vals, offset, color, width) => {
    g.strokeStyle = color; g.lineWidth = width; g.beginPath();
    vals.forEach((v, i) => (i ? g.lineTo : g.moveTo).call(g, x(i + offset), y(v)));
    g.stroke();
  };
  line(values, 0, "#1f77b4", 2);
  if (overlay.sim) line(overlay.sim, overlay.offset, "#2ca02c", 3);
  if (overlay.peaks) {
    g.fillStyle = "#d62728";
    for (const t of overlay.peaks) { g.beginPath(); g.arc(x(t), y(values[t]), 7, 0, 2 * Math.PI); g.fill(); }
  }
}

function guarded(fn) {
  return () => {
    try { fn(); } catch (e) { out(`error: ${e.message ?? e}`); }
  };
}

function onSimulate() {
  const pop = simulatePopularity(num("p1"), num("q1"), num("m1"), num("p2"), num("q2"), num("m2"),
    num("onset"), num("horizon"));
  let vals = [...new Array(Math.max(0, num("lead"))).fill(0), ...pop];
  vals = $("noise").checked ? vals.map(poisson) : vals.map((v) => Math.round(v * 1000) / 1000);
  $("values").value = vals.join(", ");
  overlay = {};
  draw(Float64Array.from(vals));
  out(`simulated ${pop.length} ticks after ${num("lead")} leading zeros`);
}

function onPeaks() {
  const vals = parseValues();
  const peaks = Array.from(detectPeaks(vals, num("k"), num("h")));
  const scores = spikeScores(vals, num("k"));
  overlay = { peaks };
  draw(vals);
  const rows = peaks.map((t) => `  t=${t}  value=${vals[t].toFixed(2)}  score=${scores[t].toFixed(3)}`);
  out(`${peaks.length} peak(s)\n${rows.join("\n")}`);
}

function onAnalyze() {
  const vals = parseValues();
  const a = analyze(vals, num("k"), num("h"), num("alpha"));
  overlay = { peaks: Array.from(detectPeaks(vals, num("k"), num("h"))) };
  if (!a.accepted) {
    draw(vals);
    out(`rejected: ${a.reason}`);
    a.free();
    return;
  }
  const st = Array.from(a.stamps);
  overlay.stamps = st;
  const lines = [
    `accepted  stamps [t0 ta1 t1 tf1 ta2 t2 tf2 T] = [${st.join(" ")}]`,
    `B1 = ${a.b1.toFixed(3)}  B2 = ${a.b2.toFixed(3)}  gap = ${st[4] - st[1]}`,
  ];
  if (a.fitError) {
    lines.push(`fit failed: ${a.fitError}`);
  } else {
    overlay.sim = Array.from(a.simulated);
    overlay.offset = a.offset;
    const [p1, q1, m1, p2, q2, m2] = Array.from(a.params);
    lines.push(`g1: p=${p1.toFixed(4)} q=${q1.toFixed(4)} m=${m1.toFixed(1)}`);
    lines.push(`g2: p=${p2.toFixed(4)} q=${q2.toFixed(4)} m=${m2.toFixed(1)}`);
    lines.push(`Pearson r = ${a.pearsonR.toFixed(4)}`);
  }
  a.free();
  draw(vals);
  out(lines.join("\n"));
}

await init();
$("simulate").onclick = guarded(onSimulate);
$("peaks").onclick = guarded(onPeaks);
$("analyze").onclick = guarded(onAnalyze);
guarded(onSimulate)();
