//! Field snapshots: raw little-endian `f64` data plus a JSON sidecar.
//!
//! Blocks, in order: `f`, `theta`, then per side the three velocity
//! components and the nine deformation entries (column-major, `F_j`
//! components consecutive). Bulk arrays are stored level by level from
//! the interface (`ζ = 0`) to the lid.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Config, SimState, Simulator};
use crate::divcurl::SideFields;
use crate::error::{Error, Result};
use crate::geometry::{BulkVector, Side, StripGeometry};
use crate::interface_dynamics::InterfaceState;
use crate::spectral::InterfaceField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub sides: Vec<Side>,
    pub blocks: Vec<Block>,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub period: f64,
    /// Flattened vertical coordinate of each level.
    pub zeta: Vec<f64>,
    pub mapping: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub shape: Shape,
    pub grid: GridInfo,
    pub time: f64,
    pub config_hash: String,
    pub config: String,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub sidecar: Sidecar,
    pub data: Vec<f64>,
}

const FORMAT: &str = "f64-le";

fn side_blocks(side: Side) -> Vec<String> {
    let s = side.name();
    let mut names: Vec<String> = (1..=3).map(|a| format!("u{a}_{s}")).collect();
    for j in 1..=3 {
        for i in 1..=3 {
            names.push(format!("F{i}{j}_{s}"));
        }
    }
    names
}

impl Snapshot {
    pub fn from_state(sim: &Simulator, state: &SimState) -> Self {
        let cfg = sim.config();
        let np = sim.horizontal().npts();
        let len = np * cfg.m;
        let mut blocks = Vec::new();
        let mut data = Vec::new();
        let mut push = |name: String, vals: &[f64], blocks: &mut Vec<Block>| {
            blocks.push(Block {
                name,
                offset: data.len(),
                len: vals.len(),
            });
            data.extend_from_slice(vals);
        };
        push("f".into(), state.interface.f.values(), &mut blocks);
        push("theta".into(), state.interface.theta.values(), &mut blocks);
        for (&side, fl) in sim.sides().iter().zip(&state.sides) {
            let names = side_blocks(side);
            let mut it = names.into_iter();
            for c in &fl.velocity.comps {
                push(it.next().unwrap(), c, &mut blocks);
            }
            for col in &fl.deformation {
                for c in &col.comps {
                    push(it.next().unwrap(), c, &mut blocks);
                }
            }
        }
        debug_assert_eq!(data.len(), 2 * np + sim.sides().len() * 12 * len);
        let total = data.len();
        Self {
            sidecar: Sidecar {
                format: FORMAT.into(),
                shape: Shape {
                    d: cfg.d,
                    n: cfg.n,
                    m: cfg.m,
                    sides: sim.sides().to_vec(),
                    blocks,
                    total,
                },
                grid: GridInfo {
                    period: 2.0 * std::f64::consts::PI,
                    zeta: sim.strip(Side::Plus).vertical().nodes().to_vec(),
                    mapping: "x3 = f + zeta * (lid - f), lid = +1 (plus) or -1 (minus)".into(),
                },
                time: state.time,
                config_hash: cfg.hash(),
                config: cfg.to_toml(),
            },
            data,
        }
    }

    /// Writes `<stem>.bin` and `<stem>.json`.
    pub fn write(&self, stem: &Path) -> Result<(PathBuf, PathBuf)> {
        let bin = stem.with_extension("bin");
        let json = stem.with_extension("json");
        let bytes: Vec<u8> = self.data.iter().flat_map(|v| v.to_le_bytes()).collect();
        std::fs::write(&bin, bytes)?;
        std::fs::write(&json, serde_json::to_string_pretty(&self.sidecar)?)?;
        Ok((bin, json))
    }

    /// Reads from either the `.bin` or the `.json` path.
    pub fn read(path: &Path) -> Result<Self> {
        let json = path.with_extension("json");
        let bin = path.with_extension("bin");
        let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(&json)?)?;
        if sidecar.format != FORMAT {
            return Err(Error::Config(format!("unsupported snapshot format {}", sidecar.format)));
        }
        let bytes = std::fs::read(&bin)?;
        if bytes.len() != 8 * sidecar.shape.total {
            return Err(Error::GridMismatch(format!(
                "snapshot holds {} bytes, sidecar expects {}",
                bytes.len(),
                8 * sidecar.shape.total
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Self { sidecar, data })
    }

    pub fn config(&self) -> Result<Config> {
        Config::from_toml(&self.sidecar.config)
    }

    fn block(&self, name: &str) -> Result<&[f64]> {
        let b = self
            .sidecar
            .shape
            .blocks
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::GridMismatch(format!("snapshot has no block {name}")))?;
        Ok(&self.data[b.offset..b.offset + b.len])
    }

    /// Rebuilds the state on `sim`'s grid (which must match). Curls and
    /// lid integrals are recomputed from the stored fields.
    pub fn into_state(self, sim: &Simulator) -> Result<SimState> {
        let cfg = sim.config();
        let sh = &self.sidecar.shape;
        if (sh.d, sh.n, sh.m) != (cfg.d, cfg.n, cfg.m) {
            return Err(Error::GridMismatch(format!(
                "snapshot grid (d={}, n={}, m={}) differs from configuration (d={}, n={}, m={})",
                sh.d, sh.n, sh.m, cfg.d, cfg.n, cfg.m
            )));
        }
        let h = sim.horizontal();
        let f = InterfaceField::new(h.clone(), self.block("f")?.to_vec())?;
        let theta = InterfaceField::new(h.clone(), self.block("theta")?.to_vec())?;
        let mut sides = Vec::new();
        for &side in sim.sides() {
            let grid = sim.strip(side);
            let geom = StripGeometry::new(&f, &grid)?;
            let names = side_blocks(side);
            let get = |k: usize| self.block(&names[k]).map(|v| v.to_vec());
            let velocity = BulkVector {
                grid: grid.clone(),
                comps: [get(0)?, get(1)?, get(2)?],
            };
            let mut deformation: [BulkVector; 3] = std::array::from_fn(|_| BulkVector::zeros(&grid));
            for (j, col) in deformation.iter_mut().enumerate() {
                col.comps = [get(3 + 3 * j)?, get(4 + 3 * j)?, get(5 + 3 * j)?];
            }
            sides.push(SideFields::from_fields(&geom, velocity, deformation));
        }
        Ok(SimState {
            interface: InterfaceState { f, theta },
            sides,
            params: *sim.params(),
            time: self.sidecar.time,
        })
    }
}
