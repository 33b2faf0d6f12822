import init, { sample, covering, eigenstates } from "./pkg/msalab_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guarded(out, f) {
  try {
    f();
  } catch (e) {
    $(out).textContent = `error: ${e}`;
  }
}

// maps [-half, half]^2 onto the canvas
function squareView(canvas, half) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const s = canvas.width / (2 * half);
  return { ctx, s, px: (x) => (x + half) * s, py: (y) => (half - y) * s };
}

function drawSample() {
  guarded("s-info", () => {
    const side = num("s-side");
    const r = JSON.parse(sample(2, side, num("s-rho"), BigInt(num("s-seed"))));
    const { ctx, px, py } = squareView($("s-canvas"), side / 2);
    for (const [pts, colour] of [[r.x, "#1f5fbf"], [r.x_prime, "#d0602a"]]) {
      ctx.fillStyle = colour;
      for (const [x, y] of pts) {
        ctx.beginPath();
        ctx.arc(px(x), py(y), 3, 0, 2 * Math.PI);
        ctx.fill();
      }
    }
    $("s-info").textContent = `X: ${r.x.length} points (blue), X′: ${r.x_prime.length} points (orange)`;
  });
}

function drawCovering() {
  guarded("c-info", () => {
    const big = num("c-big");
    const ell = num("c-ell");
    const r = JSON.parse(covering(big, ell));
    const { ctx, s, px, py } = squareView($("c-canvas"), big / 2);
    ctx.strokeStyle = "rgba(31, 95, 191, 0.5)";
    for (const [x, y] of r.centers) {
      ctx.strokeRect(px(x - ell / 2), py(y + ell / 2), ell * s, ell * s);
    }
    const v = r.validation;
    $("c-info").textContent =
      `α = ${r.alpha.toFixed(4)}, n = ${r.n}, ${r.centers.length} boxes\n` +
      `coverage ${v.coverage}, ℓ/5 neighbourhoods ${v.boundary_cover_core}, ` +
      `2ℓ/5 neighbourhoods ${v.boundary_cover_literal}, cores disjoint ${v.core_disjoint}`;
  });
}

function drawStates() {
  guarded("e-info", () => {
    const r = JSON.parse(eigenstates(num("e-side"), num("e-rho"), num("e-e0"), BigInt(num("e-seed"))));
    const canvas = $("e-canvas");
    const ctx = canvas.getContext("2d");
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const x0 = r.nodes[0];
    const x1 = r.nodes[r.nodes.length - 1];
    const px = (x) => ((x - x0) / (x1 - x0)) * canvas.width;
    const vmax = Math.max(1, ...r.potential);
    ctx.fillStyle = "#ddd";
    r.nodes.forEach((x, i) => {
      const h = (r.potential[i] / vmax) * 80;
      ctx.fillRect(px(x), canvas.height - h, 2, h);
    });
    const colours = ["#1f5fbf", "#d0602a", "#2a9d4b", "#8e44ad", "#c0392b", "#16a085"];
    r.states.forEach((st, k) => {
      const amax = Math.max(...st.psi.map(Math.abs));
      ctx.strokeStyle = colours[k % colours.length];
      ctx.beginPath();
      st.psi.forEach((v, i) => {
        const y = canvas.height - 90 - (Math.abs(v) / amax) * (canvas.height - 110);
        i === 0 ? ctx.moveTo(px(r.nodes[i]), y) : ctx.lineTo(px(r.nodes[i]), y);
      });
      ctx.stroke();
    });
    $("e-info").textContent =
      `${r.impurities.length} impurities, ${r.states.length} states below E₀\n` +
      r.states
        .map((st) =>
          st.fit
            ? `λ = ${st.eigenvalue.toFixed(4)}: m̂ = ${st.fit.mass.toFixed(3)}, r² = ${st.fit.r_squared.toFixed(3)}`
            : `λ = ${st.eigenvalue.toFixed(4)}: box too small for a fit`)
        .join("\n");
  });
}

await init();
$("s-run").onclick = drawSample;
$("c-run").onclick = drawCovering;
$("e-run").onclick = drawStates;
drawSample();
drawCovering();
drawStates();
