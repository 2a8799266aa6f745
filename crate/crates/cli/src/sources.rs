//! Input sources: graphs from edge-list files or named constructions, and
//! kernels from JSON files or named constructions.

use gmetrics::graph::Graph;
use gmetrics::kernel::{named_kernel, NamedKernel, StepKernel};
use gmetrics::sampler::{self, SampleRecord};
use std::collections::HashMap;
use std::fs;
use std::io::BufReader;

/// `name:key=val,key=val` construction specs.
#[derive(Clone, Debug)]
pub struct ConstructionSpec {
    pub name: String,
    pub params: HashMap<String, String>,
}

impl ConstructionSpec {
    pub fn parse(text: &str) -> Result<ConstructionSpec, String> {
        let (name, rest) = match text.split_once(':') {
            Some((n, r)) => (n.trim().to_string(), r),
            None => (text.trim().to_string(), ""),
        };
        let mut params = HashMap::new();
        for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| format!("expected key=val in construction spec, got `{kv}`"))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ConstructionSpec { name, params })
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, String> {
        match self.params.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| format!("bad numeric value for `{key}`")),
        }
    }

    fn u64(&self, key: &str) -> Result<Option<u64>, String> {
        match self.params.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| format!("bad integer value for `{key}`")),
        }
    }

    /// Instantiates at order `n` with density `p` and the given seed.
    pub fn sample(&self, n: usize, p: f64, seed: u64) -> Result<SampleRecord, String> {
        match self.name.as_str() {
            "gnp" => sampler::sample_gnp(n, p, seed).map_err(|e| e.to_string()),
            "inhomogeneous" => {
                let kernel_spec = self
                    .params
                    .get("kernel")
                    .ok_or("inhomogeneous construction needs kernel=...")?;
                let kappa = load_kernel(kernel_spec)?;
                sampler::sample_inhomogeneous(n, &kappa, p, seed).map_err(|e| e.to_string())
            }
            "too_few_triangles" => {
                let ratio = self.f64("ratio")?.unwrap_or(0.5);
                sampler::construct_too_few_triangles(n, ratio, seed).map_err(|e| e.to_string())
            }
            "blowup" => {
                let t = self.u64("t")?.unwrap_or(3) as u32;
                let c = self.f64("c")?.unwrap_or(1.0);
                sampler::construct_blowup_counterexample(n, t, c, seed).map_err(|e| e.to_string())
            }
            "planted_clique" => {
                let c = self.f64("c")?.unwrap_or(1.5);
                sampler::construct_planted_clique(n, c, p, seed).map_err(|e| e.to_string())
            }
            "polarity" => {
                let q = self.u64("q")?.ok_or("polarity construction needs q=...")?;
                sampler::construct_polarity_graph(q).map_err(|e| e.to_string())
            }
            other => Err(format!("unknown construction `{other}`")),
        }
    }
}

/// Loads a kernel from a JSON file path or a named spec such as
/// `constant:1.0`, `chessboard1`, `kappa_d:d=3,r=4`, `rank1_log:r=16`,
/// `random_dyadic:r=3,seed=5`.
pub fn load_kernel(spec: &str) -> Result<StepKernel, String> {
    if spec.ends_with(".json") {
        let text = fs::read_to_string(spec).map_err(|e| format!("reading {spec}: {e}"))?;
        return StepKernel::from_json(&text).map_err(|e| e.to_string());
    }
    let parsed = ConstructionSpec::parse(spec)?;
    let named = match parsed.name.as_str() {
        "constant" => NamedKernel::Constant(
            parsed
                .f64("c")?
                .or_else(|| parsed.params.is_empty().then_some(1.0))
                .or_else(|| {
                    // allow `constant:1.5` shorthand via a bare value param
                    parsed.params.keys().next().and_then(|k| k.parse().ok())
                })
                .unwrap_or(1.0),
        ),
        "chessboard1" => NamedKernel::Chessboard1,
        "chessboard2" => NamedKernel::Chessboard2,
        "rank1_log" => NamedKernel::Rank1Log {
            r: parsed.u64("r")?.unwrap_or(16) as usize,
        },
        "kappa_d" => NamedKernel::KappaD {
            d: parsed.f64("d")?.unwrap_or(3.0),
            r: parsed.u64("r")?.unwrap_or(4) as usize,
        },
        "random_dyadic" => NamedKernel::RandomDyadic {
            r: parsed.u64("r")?.unwrap_or(3) as u32,
            seed: parsed.u64("seed")?.unwrap_or(0),
        },
        other => return Err(format!("unknown kernel `{other}`")),
    };
    named_kernel(&named).map_err(|e| e.to_string())
}

pub fn load_graph(path: &str) -> Result<(Graph, Vec<String>), String> {
    let file = fs::File::open(path).map_err(|e| format!("opening {path}: {e}"))?;
    Graph::from_edge_list_text(BufReader::new(file)).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_spec_parsing() {
        let spec = ConstructionSpec::parse("blowup:t=3,c=1.5").unwrap();
        assert_eq!(spec.name, "blowup");
        assert_eq!(spec.params["t"], "3");
        assert!(ConstructionSpec::parse("gnp:oops").is_err());
    }

    #[test]
    fn named_kernels_load() {
        assert_eq!(load_kernel("chessboard1").unwrap().k(), 2);
        assert_eq!(load_kernel("kappa_d:d=3,r=4").unwrap().k(), 5);
        assert!(load_kernel("mystery").is_err());
    }
}
