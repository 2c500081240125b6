import init, { scenario, simulate, acceptance_curve } from "./pkg/relocsim_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const COLORS = { none: "#888", standard: "#d62728", stackable: "#1f77b4", autonomous: "#2ca02c" };

function scenarioInput() {
  return { cols: num("cols"), rows: num("rows"), spacing_m: num("spacing"), daily_trips: num("trips"), seed: num("seed") };
}

function call(fn, input) {
  $("status").textContent = "";
  try {
    return JSON.parse(fn(JSON.stringify(input)));
  } catch (e) {
    $("status").textContent = String(e);
    return null;
  }
}

function clear(canvas) {
  const g = canvas.getContext("2d");
  g.clearRect(0, 0, canvas.width, canvas.height);
  g.font = "11px system-ui";
  return g;
}

function axes(g, w, h, pad, xLabel, yMax) {
  g.strokeStyle = "#999";
  g.beginPath();
  g.moveTo(pad, 5);
  g.lineTo(pad, h - pad);
  g.lineTo(w - 5, h - pad);
  g.stroke();
  g.fillStyle = "#444";
  g.fillText(xLabel, w / 2 - 20, h - 4);
  g.fillText(String(yMax), 2, 12);
  g.fillText("0", pad - 10, h - pad);
}

function drawMap(s) {
  const c = $("map");
  const g = clear(c);
  const xs = s.stations.map((p) => p[0]);
  const ys = s.stations.map((p) => p[1]);
  const [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const pad = 30;
  const scale = Math.min((c.width - 2 * pad) / Math.max(x1 - x0, 1), (c.height - 2 * pad) / Math.max(y1 - y0, 1));
  const at = (i) => [pad + (xs[i] - x0) * scale, c.height - pad - (ys[i] - y0) * scale];
  const peak = Math.max(...s.flows.map((f) => f.per_hour), 1e-9);
  for (const f of s.flows) {
    const [a, b] = [at(f.from), at(f.to)];
    g.strokeStyle = `rgba(31,119,180,${0.2 + 0.8 * f.per_hour / peak})`;
    g.lineWidth = 1 + 3 * f.per_hour / peak;
    g.beginPath();
    g.moveTo(a[0], a[1]);
    g.lineTo(b[0], b[1]);
    g.stroke();
  }
  g.lineWidth = 1;
  const worst = Math.max(...s.unbalance.map(Math.abs), 1);
  s.stations.forEach((_, i) => {
    const [x, y] = at(i);
    const u = s.unbalance[i] / worst;
    g.fillStyle = u >= 0 ? `rgba(44,160,44,${0.3 + 0.7 * u})` : `rgba(214,39,40,${0.3 - 0.7 * u})`;
    g.beginPath();
    g.arc(x, y, 6 + 4 * Math.abs(u), 0, 2 * Math.PI);
    g.fill();
    g.fillStyle = "#222";
    g.fillText(String(i), x + 9, y - 6);
  });
  $("bounds").textContent = [
    `${s.stations.length} stations, ${s.trips} trips`,
    `fleet without relocation: ${s.no_relocation_fleet}`,
    `fluid fleet with relocation: ${s.fluid_fleet.toFixed(2)}`,
    `suggested fleet: ${s.suggested_fleet}`,
    "",
    "green: net inflow over the day",
    "red: net outflow",
    "blue lines: optimal empty-vehicle flows",
  ].join("\n");
}

function drawBusy(series) {
  const c = $("busy");
  const g = clear(c);
  const pad = 25;
  const top = Math.max(1, ...series);
  axes(g, c.width, c.height, pad, "hour of day", Math.ceil(top));
  g.strokeStyle = COLORS.stackable;
  g.beginPath();
  series.forEach((v, i) => {
    const x = pad + (i / Math.max(series.length - 1, 1)) * (c.width - pad - 5);
    const y = c.height - pad - (v / top) * (c.height - pad - 5);
    i ? g.lineTo(x, y) : g.moveTo(x, y);
  });
  g.stroke();
  g.fillText("busy relocators", pad + 5, 14);
}

function drawTrains(lengths) {
  const c = $("trains");
  const g = clear(c);
  const pad = 25;
  const bars = lengths.slice(1);
  const top = Math.max(1, ...bars);
  axes(g, c.width, c.height, pad, "train length", top);
  const w = (c.width - pad - 5) / Math.max(bars.length, 1);
  bars.forEach((v, i) => {
    const h = (v / top) * (c.height - pad - 5);
    g.fillStyle = COLORS.stackable;
    g.fillRect(pad + i * w + 1, c.height - pad - h, w - 2, h);
    g.fillStyle = "#444";
    g.fillText(String(i + 1), pad + i * w + w / 2 - 3, c.height - pad + 11);
  });
}

function drawCurves(r) {
  const c = $("curve");
  const g = clear(c);
  const pad = 30;
  axes(g, c.width, c.height, pad, "relocators", 1);
  const k = r.relocators;
  const x = (i) => pad + (k.length === 1 ? 0.5 : i / (k.length - 1)) * (c.width - pad - 90);
  const y = (a) => c.height - pad - a * (c.height - pad - 5);
  k.forEach((v, i) => g.fillText(String(v), x(i) - 4, c.height - pad + 12));
  r.curves.forEach((cv, n) => {
    g.strokeStyle = g.fillStyle = COLORS[cv.strategy];
    g.beginPath();
    cv.acceptance.forEach((a, i) => (i ? g.lineTo(x(i), y(a)) : g.moveTo(x(i), y(a))));
    g.stroke();
    g.fillText(cv.strategy, c.width - 80, 15 + 14 * n);
  });
}

function load() {
  const s = call(scenario, scenarioInput());
  if (s) drawMap(s);
}

function run() {
  const input = {
    scenario: scenarioInput(),
    strategy: $("strategy").value,
    relocators: num("relocators"),
    interval_s: num("interval"),
    train_size: num("train"),
  };
  if ($("fleet").value !== "") input.fleet = num("fleet");
  const m = call(simulate, input);
  if (!m) return;
  drawBusy(m.busy_per_minute);
  drawTrains(m.train_lengths);
  $("summary").textContent =
    `fleet ${m.fleet}: accepted ${m.accepted}, rejected ${m.rejected} ` +
    `(${(100 * m.acceptance).toFixed(1)}%), relocated ${m.relocated_vehicles} vehicles` +
    (m.mean_train_length == null ? "" : `, mean train length ${m.mean_train_length.toFixed(2)}`);
}

function curves() {
  const relocators = $("counts").value.split(",").map((v) => Number(v.trim())).filter((v) => Number.isInteger(v) && v >= 0);
  const r = call(acceptance_curve, { scenario: scenarioInput(), interval_s: num("interval"), relocators });
  if (r) drawCurves(r);
}

await init();
$("load").onclick = load;
$("run").onclick = run;
$("curves").onclick = curves;
load();
run();
