import init, { scoreSurface, compareReplication, simulateTable } from "./pkg/esbt_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function fail(target, err) {
  target.innerHTML = `<span class="err">${err.message ?? err}</span>`;
}

function drawSurface() {
  const out = $("s-out");
  let s;
  try {
    s = JSON.parse(scoreSurface(num("s-alpha"), num("s-mu"), num("s-sigma"), $("s-g2").value, 61));
  } catch (err) {
    return fail(out, err);
  }
  const canvas = $("s-canvas");
  const ctx = canvas.getContext("2d");
  const n = s.v.length;
  const cell = canvas.width / n;
  const finite = s.scores.filter((x) => x !== null);
  const lo = Math.min(...finite);
  const hi = Math.max(...finite);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  // VaR on the horizontal axis, ES on the vertical axis (increasing upwards).
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const v = s.scores[i * n + j];
      if (v === null) {
        ctx.fillStyle = "#eee";
      } else {
        const t = Math.sqrt((v - lo) / (hi - lo || 1));
        ctx.fillStyle = `hsl(220, 60%, ${15 + 80 * t}%)`;
      }
      ctx.fillRect(i * cell, (n - 1 - j) * cell, cell + 0.5, cell + 0.5);
    }
  }
  const px = (v) => ((v - s.v[0]) / (s.v[n - 1] - s.v[0])) * (canvas.width - cell) + cell / 2;
  const py = (e) => canvas.height - (((e - s.e[0]) / (s.e[n - 1] - s.e[0])) * (canvas.height - cell) + cell / 2);
  ctx.strokeStyle = "#fff";
  ctx.lineWidth = 2;
  const [tx, ty] = [px(s.truth.var), py(s.truth.es)];
  ctx.beginPath();
  ctx.moveTo(tx - 8, ty); ctx.lineTo(tx + 8, ty); ctx.moveTo(tx, ty - 8); ctx.lineTo(tx, ty + 8);
  ctx.stroke();
  ctx.strokeStyle = "#fc0";
  ctx.beginPath();
  ctx.arc(px(s.argmin.var), py(s.argmin.es), 6, 0, 2 * Math.PI);
  ctx.stroke();
  out.textContent =
    `true  (VaR, ES) = (${s.truth.var.toFixed(4)}, ${s.truth.es.toFixed(4)})\n` +
    `grid argmin     = (${s.argmin.var.toFixed(4)}, ${s.argmin.es.toFixed(4)})\n` +
    `VaR range [${s.v[0].toFixed(2)}, ${s.v[n - 1].toFixed(2)}], ES range [${s.e[0].toFixed(2)}, ${s.e[n - 1].toFixed(2)}]`;
}

function runReplication() {
  const out = $("c-out");
  let r;
  try {
    r = JSON.parse(
      compareReplication($("c-scenario").value, BigInt(num("c-seed")), BigInt(num("c-rep")), 0.025, $("c-g2").value, num("c-lag")),
    );
  } catch (err) {
    return fail(out, err);
  }
  const canvas = $("c-canvas");
  const ctx = canvas.getContext("2d");
  const d = r.cumulative_d;
  const lo = Math.min(0, ...d);
  const hi = Math.max(0, ...d);
  const x = (t) => (t / (d.length - 1)) * (canvas.width - 20) + 10;
  const y = (v) => canvas.height - 10 - ((v - lo) / (hi - lo || 1)) * (canvas.height - 20);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#aaa";
  ctx.beginPath(); ctx.moveTo(x(0), y(0)); ctx.lineTo(x(d.length - 1), y(0)); ctx.stroke();
  ctx.strokeStyle = { green: "#1a7f37", yellow: "#9a6700", red: "#cf222e" }[r.result.zone];
  ctx.lineWidth = 2;
  ctx.beginPath();
  d.forEach((v, t) => (t === 0 ? ctx.moveTo(x(t), y(v)) : ctx.lineTo(x(t), y(v))));
  ctx.stroke();
  const res = r.result;
  out.innerHTML =
    `T2 = ${res.t2.toFixed(4)}   sigma_N = ${res.sigma_n.toExponential(3)}\n` +
    `p(H0-) = ${res.p_superior.toFixed(4)}   p(H0+) = ${res.p_inferior.toFixed(4)}\n` +
    `zone: <span class="${res.zone}">${res.zone}</span>`;
}

const LABELS = {
  traditional_var: "Traditional VaR 0.01",
  traditional_es: "Traditional ES 0.025",
  comparative_var: "Comparative VaR 0.01",
  comparative_joint: "Comparative (VaR, ES) 0.025",
};

function runTable() {
  const out = $("t-out");
  out.textContent = "running...";
  // Let the browser paint before the synchronous simulation starts.
  setTimeout(() => {
    let t;
    const started = performance.now();
    try {
      t = JSON.parse(simulateTable($("t-scenario").value, BigInt(num("t-seed")), num("t-reps")));
    } catch (err) {
      return fail(out, err);
    }
    const ms = performance.now() - started;
    const rows = t.rows
      .map(
        (r) =>
          `<tr><td>${LABELS[r.test]}</td><td class="green">${r.green_pct.toFixed(2)}</td>` +
          `<td class="yellow">${r.yellow_pct.toFixed(2)}</td><td class="red">${r.red_pct.toFixed(2)}</td></tr>`,
      )
      .join("");
    out.innerHTML =
      `<table><tr><th>Test</th><th>Green</th><th>Yellow</th><th>Red</th></tr>${rows}</table>` +
      `<p>${(ms / 1000).toFixed(2)} s</p>`;
  }, 20);
}

await init();
$("status").textContent = "";
$("s-run").addEventListener("click", drawSurface);
$("c-run").addEventListener("click", runReplication);
$("t-run").addEventListener("click", runTable);
drawSurface();
runReplication();
