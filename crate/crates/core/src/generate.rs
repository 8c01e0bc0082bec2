//! Regular topologies built from directed adjacency links: chains, rings,
//! cubic lattices, body-centred cubic cells and Clos networks.
//!
//! Every link from `a` to its forward neighbour `b` is four promises: `a`
//! offers and `b` accepts the forward direction, `b` offers and `a` accepts
//! the backward one. Indices are zero-padded so canonical agent order
//! follows the geometry.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{AgentId, Attributes, World};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorSpec {
    Line(usize),
    Ring(usize),
    Lattice2d(usize, usize),
    Lattice3d(usize, usize, usize),
    /// Cells per side.
    Bcc(usize),
    /// Spines, leaves, hosts per leaf.
    Clos(usize, usize, usize),
}

impl GeneratorSpec {
    /// Builds a spec from a family name and its size parameters.
    pub fn from_parts(family: &str, params: &[usize]) -> Result<GeneratorSpec, GenerateError> {
        let arity = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(GenerateError::InvalidParams(format!(
                    "{family} takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let spec = match family {
            "line" => arity(1).map(|_| GeneratorSpec::Line(params[0])),
            "ring" => arity(1).map(|_| GeneratorSpec::Ring(params[0])),
            "lattice2d" => arity(2).map(|_| GeneratorSpec::Lattice2d(params[0], params[1])),
            "lattice3d" => {
                arity(3).map(|_| GeneratorSpec::Lattice3d(params[0], params[1], params[2]))
            }
            "bcc" => arity(1).map(|_| GeneratorSpec::Bcc(params[0])),
            "clos" => arity(3).map(|_| GeneratorSpec::Clos(params[0], params[1], params[2])),
            other => Err(GenerateError::InvalidParams(format!(
                "unknown family {other:?}"
            ))),
        }?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), GenerateError> {
        let bad = |why: &str| Err(GenerateError::InvalidParams(format!("{self}: {why}")));
        match *self {
            GeneratorSpec::Ring(n) if n < 3 => bad("a ring needs at least 3 agents"),
            GeneratorSpec::Line(0) | GeneratorSpec::Bcc(0) => bad("size must be positive"),
            GeneratorSpec::Lattice2d(a, b) if a == 0 || b == 0 => bad("sizes must be positive"),
            GeneratorSpec::Lattice3d(a, b, c) if a == 0 || b == 0 || c == 0 => {
                bad("sizes must be positive")
            }
            GeneratorSpec::Clos(s, l, _) if s == 0 || l == 0 => {
                bad("spines and leaves must be positive")
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Line(n) => write!(f, "line {n}"),
            GeneratorSpec::Ring(n) => write!(f, "ring {n}"),
            GeneratorSpec::Lattice2d(a, b) => write!(f, "lattice2d {a} {b}"),
            GeneratorSpec::Lattice3d(a, b, c) => write!(f, "lattice3d {a} {b} {c}"),
            GeneratorSpec::Bcc(k) => write!(f, "bcc {k}"),
            GeneratorSpec::Clos(s, l, h) => write!(f, "clos {s} {l} {h}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = GenerateError;

    /// `"<family> <p1> <p2> ..."`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace();
        let family = words
            .next()
            .ok_or_else(|| GenerateError::InvalidParams("empty generator spec".into()))?;
        let params = words
            .map(|w| {
                w.parse()
                    .map_err(|_| GenerateError::InvalidParams(format!("{w:?} is not a size")))
            })
            .collect::<Result<Vec<usize>, _>>()?;
        GeneratorSpec::from_parts(family, &params)
    }
}

fn width(n: usize) -> usize {
    n.max(1).to_string().len()
}

fn id(s: String) -> AgentId {
    AgentId::new(s).expect("generated names are tokens")
}

struct Builder {
    w: World,
}

impl Builder {
    fn new() -> Builder {
        Builder { w: World::new() }
    }

    fn agent(&mut self, a: &AgentId) {
        self.w
            .insert_agent(a.clone(), Attributes::new())
            .expect("generated names are distinct");
    }

    fn link(&mut self, a: &AgentId, b: &AgentId, forward: &str, backward: &str) {
        self.w
            .insert_directed_link(a, b, forward, backward)
            .expect("generated agents exist");
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<World, GenerateError> {
    spec.validate()?;
    let mut b = Builder::new();
    match *spec {
        GeneratorSpec::Line(n) | GeneratorSpec::Ring(n) => {
            let wd = width(n);
            let ids: Vec<AgentId> = (1..=n).map(|i| id(format!("v{i:0wd$}"))).collect();
            ids.iter().for_each(|a| b.agent(a));
            for pair in ids.windows(2) {
                b.link(&pair[0], &pair[1], "R", "L");
            }
            if matches!(spec, GeneratorSpec::Ring(_)) {
                b.link(&ids[n - 1], &ids[0], "R", "L");
            }
        }
        GeneratorSpec::Lattice2d(nx, ny) => {
            let (wx, wy) = (width(nx - 1), width(ny - 1));
            let name = |i: usize, j: usize| id(format!("p{i:0wx$}_{j:0wy$}"));
            for i in 0..nx {
                for j in 0..ny {
                    b.agent(&name(i, j));
                }
            }
            for i in 0..nx {
                for j in 0..ny {
                    if i + 1 < nx {
                        b.link(&name(i, j), &name(i + 1, j), "x+", "x-");
                    }
                    if j + 1 < ny {
                        b.link(&name(i, j), &name(i, j + 1), "y+", "y-");
                    }
                }
            }
        }
        GeneratorSpec::Lattice3d(nx, ny, nz) => cubic(&mut b, "p", (nx, ny, nz)),
        GeneratorSpec::Bcc(k) => {
            cubic(&mut b, "c", (k + 1, k + 1, k + 1));
            let wc = width(k);
            let wb = width(k - 1);
            let corner = |i: usize, j: usize, l: usize| id(format!("c{i:0wc$}_{j:0wc$}_{l:0wc$}"));
            for i in 0..k {
                for j in 0..k {
                    for l in 0..k {
                        let centre = id(format!("b{i:0wb$}_{j:0wb$}_{l:0wb$}"));
                        b.agent(&centre);
                        for di in 0..2 {
                            for dj in 0..2 {
                                for dl in 0..2 {
                                    let sign = |d: usize| if d == 1 { 'p' } else { 'm' };
                                    let flip = |d: usize| if d == 1 { 'm' } else { 'p' };
                                    let fwd = format!("{}{}{}", sign(di), sign(dj), sign(dl));
                                    let back = format!("{}{}{}", flip(di), flip(dj), flip(dl));
                                    b.link(&centre, &corner(i + di, j + dj, l + dl), &fwd, &back);
                                }
                            }
                        }
                    }
                }
            }
        }
        GeneratorSpec::Clos(s, l, h) => {
            let (ws, wl, wh) = (width(s), width(l), width(h));
            let spines: Vec<AgentId> = (1..=s).map(|i| id(format!("s{i:0ws$}"))).collect();
            let leaves: Vec<AgentId> = (1..=l).map(|j| id(format!("l{j:0wl$}"))).collect();
            spines.iter().chain(&leaves).for_each(|a| b.agent(a));
            for leaf in &leaves {
                for spine in &spines {
                    b.link(leaf, spine, "up", "down");
                }
            }
            for (j, leaf) in leaves.iter().enumerate() {
                for k in 1..=h {
                    let host = id(format!("h{:0wl$}_{k:0wh$}", j + 1));
                    b.agent(&host);
                    b.link(&host, leaf, "up", "down");
                }
            }
        }
    }
    Ok(b.w)
}

fn cubic(b: &mut Builder, prefix: &str, (nx, ny, nz): (usize, usize, usize)) {
    let (wx, wy, wz) = (width(nx - 1), width(ny - 1), width(nz - 1));
    let name = |i: usize, j: usize, k: usize| id(format!("{prefix}{i:0wx$}_{j:0wy$}_{k:0wz$}"));
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                b.agent(&name(i, j, k));
            }
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let here = name(i, j, k);
                if i + 1 < nx {
                    b.link(&here, &name(i + 1, j, k), "x+", "x-");
                }
                if j + 1 < ny {
                    b.link(&here, &name(i, j + 1, k), "y+", "y-");
                }
                if k + 1 < nz {
                    b.link(&here, &name(i, j, k + 1), "z+", "z-");
                }
            }
        }
    }
}
