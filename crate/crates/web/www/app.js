import init, { Explorer, legacySplit } from "./pkg/capkaya_web.js";

const FIELDS = 6;
const COLORS = ["#444", "#1f77b4", "#2ca02c", "#d62728", "#9467bd"];
const form = document.getElementById("params");

function values() {
  const v = {};
  for (const input of form.querySelectorAll("input")) {
    v[input.name] = Number(input.value);
    input.nextElementSibling.value = input.value;
  }
  return v;
}

function explorer(v) {
  return new Explorer(v.r / 100, v.delta / 100, v.s / 100, v.alpha / 100, v.beta / 100,
    v.gamma / 100, v.epsk, v.total, v.kshare, v.ishare);
}

function rows(flat) {
  const out = [];
  for (let i = 0; i < flat.length; i += FIELDS) {
    out.push({ year: flat[i], y: flat[i + 1], ek: flat[i + 2], ec: flat[i + 3], ei: flat[i + 4], total: flat[i + 5] });
  }
  return out;
}

// Lines or stacked areas on a canvas, with a y axis starting at zero.
function plot(canvas, series, { stacked = false } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 44;
  ctx.clearRect(0, 0, w, h);
  const xs = series[0].points.map((p) => p[0]);
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const tops = stacked
    ? xs.map((_, i) => series.reduce((a, s) => a + s.points[i][1], 0))
    : series.flatMap((s) => s.points.map((p) => p[1]));
  const ymax = Math.max(...tops) * 1.05 || 1;
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - pad - 10);
  const sy = (y) => h - 24 - (y / ymax) * (h - 34);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "11px system-ui";
  ctx.beginPath();
  ctx.moveTo(pad, 10);
  ctx.lineTo(pad, h - 24);
  ctx.lineTo(w - 10, h - 24);
  ctx.stroke();
  for (let k = 0; k <= 4; k++) {
    const y = (ymax * k) / 4;
    ctx.fillText(y.toFixed(0), 2, sy(y) + 4);
  }
  for (let x = Math.ceil(x0 / 5) * 5; x <= x1; x += 5) {
    ctx.fillText(String(x), sx(x) - 12, h - 8);
  }

  const base = xs.map(() => 0);
  for (const s of series) {
    ctx.beginPath();
    s.points.forEach((p, i) => {
      const y = stacked ? base[i] + p[1] : p[1];
      i ? ctx.lineTo(sx(p[0]), sy(y)) : ctx.moveTo(sx(p[0]), sy(y));
    });
    if (stacked) {
      for (let i = s.points.length - 1; i >= 0; i--) ctx.lineTo(sx(xs[i]), sy(base[i]));
      ctx.closePath();
      ctx.fillStyle = s.color;
      ctx.fill();
      s.points.forEach((p, i) => (base[i] += p[1]));
    } else {
      ctx.strokeStyle = s.color;
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  }
}

function render() {
  const v = values();
  const e = explorer(v);
  const names = Explorer.planNames();
  const series = [];
  const table = ["<tr><th>plan</th><th>2050 (Gt)</th><th>% of 1990</th></tr>"];
  names.forEach((name, i) => {
    try {
      const r = rows(e.project(name));
      series.push({ name, color: COLORS[i], points: r.map((x) => [x.year, x.total]) });
      const end = r[r.length - 1];
      table.push(`<tr><td>${name}</td><td>${(end.total / 1000).toFixed(2)}</td>` +
        `<td>${((100 * end.total) / v.baseline).toFixed(1)}</td></tr>`);
    } catch (err) {
      table.push(`<tr><td>${name}</td><td colspan="2" class="error">${err.message}</td></tr>`);
    }
  });
  if (series.length) plot(document.getElementById("plans"), series);
  document.getElementById("legend").innerHTML = series
    .map((s) => `<span class="key" style="background:${s.color}"></span>${s.name}`)
    .join(" &nbsp; ");
  document.getElementById("endpoints").innerHTML = table.join("");

  const split = legacySplit(v.r / 100, v.delta / 100, v.s / 100, v.alpha / 100,
    (v.total * v.kshare) / 100, v.epsk, 45);
  const legacy = [], installed = [];
  for (let i = 0; i < split.length; i += 3) {
    legacy.push([2005 + split[i], split[i + 1]]);
    installed.push([2005 + split[i], split[i + 2]]);
  }
  plot(document.getElementById("legacy"), [
    { color: "#555", points: legacy },
    { color: "#9ecae1", points: installed },
  ], { stacked: true });
  runCustom(e);
}

function runCustom(e = explorer(values())) {
  const out = document.getElementById("custom-error");
  try {
    const r = rows(e.projectSource(document.getElementById("source").value));
    out.textContent = "";
    plot(document.getElementById("custom"), [
      { color: "#7f7f7f", points: r.map((x) => [x.year, x.ek]) },
      { color: "#ff7f0e", points: r.map((x) => [x.year, x.ec]) },
      { color: "#8c564b", points: r.map((x) => [x.year, x.ei]) },
    ], { stacked: true });
  } catch (err) {
    out.textContent = err.message;
  }
}

await init();
document.getElementById("source").value = Explorer.definition("accelerated-retirement");
form.addEventListener("input", render);
document.getElementById("run").addEventListener("click", () => runCustom());
render();
