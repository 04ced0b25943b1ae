import init, { fieldGrid, effective, convergence } from "./pkg/dpheat_web.js";

const $ = (id) => document.getElementById(id);

const LAYOUTS = {
  symmetric: [[-0.25, 0.25], [0.25, 0.25], [0.25, -0.25], [-0.25, -0.25]],
  asymmetric: [[-0.18, 0.2], [0.33, -0.34], [0.33, 0.35], [-0.18, -0.2]],
  single: [[0, 0]],
};

function cell() {
  const radius = Number($("radius").value);
  const conductivity = 10 ** Number($("contrast").value);
  return {
    matrix_conductivity: 1,
    inclusions: LAYOUTS[$("layout").value].map((center) => ({ center, radius, conductivity })),
    intensity: -1,
    angle: (Number($("angle").value) * Math.PI) / 180,
    order: Number($("order").value),
  };
}

function syncLabels() {
  $("radius-out").value = Number($("radius").value).toFixed(3);
  $("contrast-out").value = (10 ** Number($("contrast").value)).toPrecision(3);
  $("angle-out").value = $("angle").value;
}

function guarded(fn) {
  return () => {
    $("error").textContent = "";
    try {
      fn();
    } catch (e) {
      $("error").textContent = String(e.message ?? e);
    }
  };
}

// blue - white - red
function color(u) {
  const s = Math.max(0, Math.min(1, u)) * 2 - 1;
  const a = Math.abs(s);
  return s < 0
    ? [255 * (1 - a), 255 * (1 - 0.6 * a), 255]
    : [255, 255 * (1 - 0.6 * a), 255 * (1 - a)];
}

function drawField() {
  const c = cell();
  const n = Number($("grid").value);
  const g = fieldGrid(JSON.stringify(c), n, n);
  const qx = g.qx, qy = g.qy;
  const values = {
    qabs: qx.map((v, i) => Math.hypot(v, qy[i])),
    qx,
    qy,
    t: g.t,
  }[$("quantity").value];
  let lo = Infinity, hi = -Infinity;
  for (const v of values) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  const span = hi > lo ? hi - lo : 1;

  const img = new ImageData(n, n);
  for (let j = 0; j < n; j++) {
    for (let i = 0; i < n; i++) {
      const [r, gr, b] = color((values[j * n + i] - lo) / span);
      // row j is y ascending; canvas rows go down
      const p = 4 * ((n - 1 - j) * n + i);
      img.data.set([r, gr, b, 255], p);
    }
  }
  const off = new OffscreenCanvas(n, n);
  off.getContext("2d").putImageData(img, 0, 0);
  const canvas = $("field");
  const ctx = canvas.getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);

  const s = canvas.width;
  ctx.strokeStyle = "#000";
  for (const inc of c.inclusions) {
    for (const dx of [-1, 0, 1]) {
      for (const dy of [-1, 0, 1]) {
        const x = (inc.center[0] + dx + 0.5) * s;
        const y = (0.5 - inc.center[1] - dy) * s;
        ctx.beginPath();
        ctx.arc(x, y, inc.radius * s, 0, 2 * Math.PI);
        ctx.stroke();
      }
    }
  }
  $("range").textContent = `min ${lo.toPrecision(6)}, max ${hi.toPrecision(6)}`;
}

function fmt(v) {
  return Number(v).toPrecision(7);
}

function showEffective() {
  const s = JSON.parse(effective(JSON.stringify(cell())));
  const t = s.tensor;
  $("effective").innerHTML = `
    <table>
      <tr><th>Λ</th><th>x</th><th>y</th></tr>
      <tr><th>x</th><td>${fmt(t.xx)}</td><td>${fmt(t.xy)}</td></tr>
      <tr><th>y</th><td>${fmt(t.yx)}</td><td>${fmt(t.yy)}</td></tr>
    </table>
    <table>
      <tr><th>ν</th><td>${fmt(s.nu)}</td></tr>
      <tr><th>Maxwell</th><td>${fmt(s.maxwell)}</td></tr>
      <tr><th>δλ</th><td>${Number(s.delta_lambda).toExponential(3)}</td></tr>
      <tr><th>residual</th><td>${Number(s.residual_sup).toExponential(3)}</td></tr>
    </table>`;
}

function showConvergence() {
  const c = cell();
  const rows = JSON.parse(convergence(JSON.stringify(c), c.order));
  $("convergence").innerHTML =
    "<table><tr><th>M</th><th>Λ<sub>xx</sub></th><th>Λ<sub>yy</sub></th><th>residual</th></tr>" +
    rows
      .map((r) => `<tr><td>${r.order}</td><td>${fmt(r.tensor.xx)}</td><td>${fmt(r.tensor.yy)}</td>` +
        `<td>${Number(r.residual_sup).toExponential(2)}</td></tr>`)
      .join("") +
    "</table>";

  const canvas = $("plot");
  canvas.hidden = false;
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  ctx.clearRect(0, 0, w, h);
  const res = rows.map((r) => Math.log10(Math.max(r.residual_sup, 1e-16)));
  const lo = Math.min(...res), hi = Math.max(...res);
  const x = (m) => pad + ((w - 2 * pad) * m) / Math.max(1, rows.length - 1);
  const y = (v) => h - pad - ((h - 2 * pad) * (v - lo)) / (hi > lo ? hi - lo : 1);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillText("log10 residual vs M", pad, pad - 8);
  ctx.fillText(hi.toFixed(1), 2, pad + 4);
  ctx.fillText(lo.toFixed(1), 2, h - pad);
  ctx.strokeStyle = "#c33";
  ctx.beginPath();
  res.forEach((v, m) => (m ? ctx.lineTo(x(m), y(v)) : ctx.moveTo(x(m), y(v))));
  ctx.stroke();
}

await init();
for (const id of ["radius", "contrast", "angle"]) $(id).addEventListener("input", syncLabels);
syncLabels();
$("run-field").addEventListener("click", guarded(drawField));
$("run-effective").addEventListener("click", guarded(showEffective));
$("run-convergence").addEventListener("click", guarded(showConvergence));
guarded(drawField)();
