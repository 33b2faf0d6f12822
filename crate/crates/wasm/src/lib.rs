//! Browser bindings for the demo page in `www/`. Every function returns a
//! JSON string; errors become JS exceptions carrying the message.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use msalab::covering::{standard_covering, validate, CoveringValidation};
use msalab::measurement::{decay_rate_fit, window_eigenpairs, DecayFit};
use msalab::operator::{Discretization, SolverConfig};
use msalab::point_process::{sample_marked, split_marked};
use msalab::rng::StreamSeed;
use msalab::Cube;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsValue> {
    serde_json::to_string(v).map_err(js_err)
}

#[derive(Serialize)]
struct Sample {
    side: f64,
    x: Vec<Vec<f64>>,
    x_prime: Vec<Vec<f64>>,
}

/// Marked Poisson sample at 2ϱ on the centered square (d = 2) or interval,
/// split into X and X′ by the marks.
#[wasm_bindgen]
pub fn sample(dim: usize, side: f64, density: f64, seed: u64) -> Result<String, JsValue> {
    let cube = Cube::centered(dim, side).map_err(js_err)?;
    let m = sample_marked(&cube, 2.0 * density, StreamSeed::new(seed)).map_err(js_err)?;
    let (x, xp) = split_marked(&m);
    to_json(&Sample { side, x: x.points().to_vec(), x_prime: xp.points().to_vec() })
}

#[derive(Serialize)]
struct Covering {
    alpha: f64,
    n: u64,
    centers: Vec<Vec<f64>>,
    validation: CoveringValidation,
}

/// Standard ℓ-covering of the centered square of side `big`.
#[wasm_bindgen]
pub fn covering(big: f64, ell: f64) -> Result<String, JsValue> {
    let plan = standard_covering(&Cube::centered(2, big).map_err(js_err)?, ell).map_err(js_err)?;
    to_json(&Covering { alpha: plan.alpha, n: plan.n, centers: plan.centers(), validation: validate(&plan) })
}

#[derive(Serialize)]
struct State {
    eigenvalue: f64,
    psi: Vec<f64>,
    fit: Option<DecayFit>,
}

#[derive(Serialize)]
struct Spectrum {
    nodes: Vec<f64>,
    potential: Vec<f64>,
    impurities: Vec<f64>,
    states: Vec<State>,
}

/// Eigenpairs below `e0` of a one-dimensional Poisson operator on [−L/2, L/2]
/// with their decay fits.
#[wasm_bindgen]
pub fn eigenstates(side: f64, density: f64, e0: f64, seed: u64) -> Result<String, JsValue> {
    let cube = Cube::centered(1, side).map_err(js_err)?;
    let disc = Discretization::default();
    let m = sample_marked(&cube, 2.0 * density, StreamSeed::new(seed)).map_err(js_err)?;
    let (x, _) = split_marked(&m);
    let h = disc.assemble_plain(&cube, &x).map_err(js_err)?;
    let w = window_eigenpairs(&h, e0, &SolverConfig::default()).map_err(js_err)?;
    let states = w
        .eigenvalues
        .iter()
        .zip(&w.eigenvectors)
        .map(|(&eigenvalue, psi)| State { eigenvalue, psi: psi.clone(), fit: decay_rate_fit(&h, psi, None).ok() })
        .collect();
    to_json(&Spectrum {
        nodes: (0..h.size()).map(|i| h.node_position(i)[0]).collect(),
        potential: h.potential().to_vec(),
        impurities: x.points().iter().map(|p| p[0]).collect(),
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outputs_parse() {
        let s: serde_json::Value = serde_json::from_str(&sample(2, 6.0, 1.0, 3).unwrap()).unwrap();
        assert!(s["x"].is_array());
        let c: serde_json::Value = serde_json::from_str(&covering(10.0, 1.0).unwrap()).unwrap();
        assert_eq!(c["centers"].as_array().unwrap().len(), (2 * c["n"].as_u64().unwrap() as usize + 1).pow(2));
        let e: serde_json::Value = serde_json::from_str(&eigenstates(16.0, 3.0, 1.5, 1).unwrap()).unwrap();
        assert_eq!(e["nodes"].as_array().unwrap().len(), e["potential"].as_array().unwrap().len());
    }
}
