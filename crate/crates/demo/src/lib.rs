//! WebAssembly bindings for the demo page. Each entry point returns a JSON
//! document describing the graph and the result for the page to draw.

use randcol::colouring::{chromatic_number_exact, colouring_number, t_core, ExactChromaticConfig};
use randcol::generators::random_regular_graph;
use randcol::percolation::{thm3_fixpoint_holds, thm3_process, RandomSet};
use randcol::sampling::{sample_subgraph, RngStream};
use randcol::Graph;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest graph the page will draw.
pub const MAX_VERTICES: usize = 400;

/// Exact colouring is capped lower to keep the page responsive.
pub const MAX_COLOUR_VERTICES: usize = 30;

fn check_size(n: usize, cap: usize) -> randcol::Result<()> {
    if n == 0 || n > cap {
        return Err(randcol::Error::Input(format!("n must lie in 1..={cap}")));
    }
    Ok(())
}

fn edges_json(g: &Graph) -> Value {
    json!(g.edges().iter().map(|&(u, v)| [u, v]).collect::<Vec<_>>())
}

/// Keeps each edge of a random `d`-regular graph with probability `p` and
/// reports the `t`-core of the result.
pub fn core_of_sample(n: usize, d: usize, p: f64, t: usize, seed: u64) -> randcol::Result<Value> {
    check_size(n, MAX_VERTICES)?;
    let g = random_regular_graph(n, d, &RngStream::new(seed, 0, "demo-graph"))?;
    let kept = sample_subgraph(&g, p, &RngStream::new(seed, 0, "demo-sample"))?;
    let core = t_core(&kept, t);
    Ok(json!({
        "n": n,
        "edges": edges_json(&g),
        "kept": g.edges().iter().map(|&(u, v)| kept.has_edge(u, v)).collect::<Vec<_>>(),
        "core": core.to_vec(),
        "colouring_number": colouring_number(&kept).0,
    }))
}

/// Exact chromatic number of `G(n, p)` with an optimal colouring.
pub fn colour_random_graph(n: usize, p: f64, seed: u64) -> randcol::Result<Value> {
    check_size(n, MAX_COLOUR_VERTICES)?;
    let g = sample_subgraph(&Graph::complete(n), p, &RngStream::new(seed, 0, "demo-gnp"))?;
    let r = chromatic_number_exact(&g, ExactChromaticConfig::default())?;
    Ok(json!({
        "n": n,
        "edges": edges_json(&g),
        "colour_of": r.colour_of,
        "chromatic_number": r.num_colours,
        "exact": r.exact,
        "colouring_number": colouring_number(&g).0,
    }))
}

/// Spread on a random cubic graph where a vertex is infected by two infected
/// neighbours, or by one across an unprotected edge.
pub fn protected_spread(n: usize, p: f64, root: usize, seed: u64) -> randcol::Result<Value> {
    check_size(n, MAX_VERTICES)?;
    let h = random_regular_graph(n, 3, &RngStream::new(seed, 0, "demo-cubic"))?;
    let st = thm3_process(&h, p, root, &RngStream::new(seed, 0, "demo-protect"))?;
    let protected = match &st.random_set {
        RandomSet::ProtectedEdges(e) => e.iter().map(|&(u, v)| [u, v]).collect(),
        _ => Vec::new(),
    };
    Ok(json!({
        "n": n,
        "edges": edges_json(&h),
        "protected": protected,
        "infected": st.infected.to_vec(),
        "round_trace": st.round_trace,
        "fixpoint_ok": thm3_fixpoint_holds(&h, &st),
    }))
}

fn to_js(r: randcol::Result<Value>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = coreOfSample)]
pub fn core_of_sample_js(n: usize, d: usize, p: f64, t: usize, seed: u64) -> Result<String, JsError> {
    to_js(core_of_sample(n, d, p, t, seed))
}

#[wasm_bindgen(js_name = colourRandomGraph)]
pub fn colour_random_graph_js(n: usize, p: f64, seed: u64) -> Result<String, JsError> {
    to_js(colour_random_graph(n, p, seed))
}

#[wasm_bindgen(js_name = protectedSpread)]
pub fn protected_spread_js(n: usize, p: f64, root: usize, seed: u64) -> Result<String, JsError> {
    to_js(protected_spread(n, p, root, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_of_full_sample_is_whole_graph() {
        let v = core_of_sample(20, 3, 1.0, 3, 1).unwrap();
        assert_eq!(v["core"].as_array().unwrap().len(), 20);
        assert!(v["kept"].as_array().unwrap().iter().all(|k| k == true));
        let v = core_of_sample(20, 3, 1.0, 4, 1).unwrap();
        assert!(v["core"].as_array().unwrap().is_empty());
    }

    #[test]
    fn colouring_is_proper_and_exact() {
        let v = colour_random_graph(16, 0.5, 4).unwrap();
        let colours: Vec<u64> = v["colour_of"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).collect();
        for e in v["edges"].as_array().unwrap() {
            let (a, b) = (e[0].as_u64().unwrap() as usize, e[1].as_u64().unwrap() as usize);
            assert_ne!(colours[a], colours[b]);
        }
        assert_eq!(v["exact"], true);
        assert!(v["chromatic_number"].as_u64() <= v["colouring_number"].as_u64());
    }

    #[test]
    fn spread_without_protection_fills_connected_graph() {
        let v = protected_spread(50, 0.0, 0, 2).unwrap();
        assert_eq!(v["fixpoint_ok"], true);
        assert!(v["protected"].as_array().unwrap().is_empty());
        let all = protected_spread(50, 1.0, 0, 2).unwrap();
        assert_eq!(all["infected"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn sizes_are_capped() {
        assert!(core_of_sample(MAX_VERTICES + 2, 3, 0.5, 2, 0).is_err());
        assert!(colour_random_graph(MAX_COLOUR_VERTICES + 1, 0.5, 0).is_err());
    }
}
