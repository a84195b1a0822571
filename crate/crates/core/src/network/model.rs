use std::cmp::Ordering;
use std::sync::Arc;

use super::params::{Gradients, Layout, ModelParams, ParamKind};
use super::tape::{NodeId, Tape};
use super::tensor::Matrix;
use super::NetworkError;
use crate::basis::BasisTables;
use crate::geometry::{compute_geometry, TwoHopGeometry};
use crate::ingest::elements::MAX_Z;
use crate::ingest::{Graph3D, RunConfig};

/// Dense layer ids: weight (`out × in`) and optional bias (`1 × out`).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Lin {
    pub w: usize,
    pub b: Option<usize>,
}

/// Bias-free bottleneck: down-projection to the intermediate size, then up.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Lb2 {
    pub down: usize,
    pub up: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct InteractionIds {
    pub ji: Lin,
    pub pre: Vec<Lin>,
    pub down: usize,
    pub distance: Lb2,
    pub angle: Option<Lb2>,
    pub torsion: Option<Lb2>,
    pub up: usize,
    pub skip: Lin,
    pub residual: Vec<[Lin; 2]>,
}

#[derive(Debug, Clone)]
pub(crate) struct Architecture {
    pub table: usize,
    pub embed_rbf: Lb2,
    pub merge: Lin,
    pub blocks: Vec<InteractionIds>,
    pub out_rbf: Lb2,
    pub out_v: Lin,
    pub out_hidden: Lin,
    pub out_final: Lin,
}

struct Builder {
    layout: Layout,
}

impl Builder {
    fn lin(&mut self, name: &str, input: usize, output: usize, bias: bool) -> Lin {
        let w = self.layout.register(format!("{name}.weight"), output, input, ParamKind::Weight);
        let b = bias.then(|| self.layout.register(format!("{name}.bias"), 1, output, ParamKind::Bias));
        Lin { w, b }
    }

    fn lb2(&mut self, name: &str, input: usize, mid: usize, output: usize) -> Lb2 {
        let down = self.layout.register(format!("{name}.down"), mid, input, ParamKind::Weight);
        let up = self.layout.register(format!("{name}.up"), output, mid, ParamKind::Weight);
        Lb2 { down, up }
    }
}

fn build_architecture(cfg: &RunConfig, tables: &BasisTables) -> (Architecture, Layout) {
    let e = cfg.embed_size;
    let o = cfg.output_embed_size;
    let mut b = Builder { layout: Layout::default() };
    let table = b.layout.register("embedding.atom_table".into(), MAX_Z as usize + 1, e, ParamKind::Table);
    let embed_rbf = b.lb2("embedding.rbf", tables.rbf_len(), cfg.int_size_distance, e);
    let merge = b.lin("embedding.merge", 3 * e, e, true);
    let mut blocks = Vec::with_capacity(cfg.num_interaction_blocks);
    for i in 0..cfg.num_interaction_blocks {
        let p = format!("interaction.{i}");
        let ji = b.lin(&format!("{p}.ji"), e, e, true);
        let pre = (0..cfg.pre_aggregation_layers - 1)
            .map(|l| b.lin(&format!("{p}.kj.{l}"), e, e, true))
            .collect();
        let down = b.layout.register(format!("{p}.down.weight"), o, e, ParamKind::Weight);
        let distance = b.lb2(&format!("{p}.distance"), tables.rbf_len(), cfg.int_size_distance, o);
        let angle = cfg
            .ablation_mode
            .uses_angle()
            .then(|| b.lb2(&format!("{p}.angle"), tables.sbf_len(), cfg.int_size_angle, o));
        let torsion = cfg
            .ablation_mode
            .uses_torsion()
            .then(|| b.lb2(&format!("{p}.torsion"), tables.tbf_len(), cfg.int_size_torsion, o));
        let up = b.layout.register(format!("{p}.up.weight"), e, o, ParamKind::Weight);
        let skip = b.lin(&format!("{p}.skip"), e, e, true);
        let residual = (0..cfg.residual_blocks)
            .map(|r| {
                [
                    b.lin(&format!("{p}.residual.{r}.0"), e, e, true),
                    b.lin(&format!("{p}.residual.{r}.1"), e, e, true),
                ]
            })
            .collect();
        blocks.push(InteractionIds { ji, pre, down, distance, angle, torsion, up, skip, residual });
    }
    let out_rbf = b.lb2("output.rbf", tables.rbf_len(), cfg.int_size_distance, e);
    let out_v = b.lin("output.node", e, o, true);
    let out_hidden = b.lin("output.hidden", o, o, true);
    let out_final = b.lin("output.final", o, 1, true);
    let arch = Architecture { table, embed_rbf, merge, blocks, out_rbf, out_v, out_hidden, out_final };
    (arch, b.layout)
}

/// Geometry and basis values of one graph, computed once and reused by every
/// forward pass. Atoms are held in a canonical order (sorted by Z, then
/// coordinates) so the summation order never depends on input labeling.
#[derive(Debug, Clone)]
pub struct GraphFeatures {
    /// `order[i]` is the input index of canonical atom `i`.
    pub order: Vec<usize>,
    pub atomic_numbers: Vec<usize>,
    pub geometry: TwoHopGeometry,
    pub rbf: Matrix,
    pub sbf: Option<Matrix>,
    pub tbf: Option<Matrix>,
}

impl GraphFeatures {
    pub fn num_atoms(&self) -> usize {
        self.order.len()
    }

    pub fn num_edges(&self) -> usize {
        self.geometry.edges.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.geometry.pairs.len()
    }
}

pub(crate) fn canonical_order(g: &Graph3D) -> Vec<usize> {
    let z = g.atomic_numbers();
    let p = g.positions();
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| {
        z[a].cmp(&z[b])
            .then_with(|| p[a][0].total_cmp(&p[b][0]))
            .then_with(|| p[a][1].total_cmp(&p[b][1]))
            .then_with(|| p[a][2].total_cmp(&p[b][2]))
            .then(Ordering::Equal)
    });
    order
}

/// A forward pass with every intermediate kept for the backward sweep.
#[derive(Debug, Clone)]
pub struct Forward {
    tape: Tape,
    output: NodeId,
    node_out: NodeId,
    node_features: NodeId,
    messages: Vec<NodeId>,
    order: Vec<usize>,
}

impl Forward {
    /// Graph-level prediction `u'`.
    pub fn energy(&self) -> f64 {
        self.tape.value(self.output).get(0, 0)
    }

    /// Per-atom readout contributions in input atom order; they sum to `u'`.
    pub fn node_outputs(&self) -> Vec<f64> {
        let y = self.tape.value(self.node_out);
        let mut out = vec![0.0; self.order.len()];
        for (i, &orig) in self.order.iter().enumerate() {
            out[orig] = y.get(i, 0);
        }
        out
    }

    /// Node features `v'` (rows in input atom order).
    pub fn node_features(&self) -> Matrix {
        let v = self.tape.value(self.node_features);
        let mut out = Matrix::zeros(v.rows(), v.cols());
        for (i, &orig) in self.order.iter().enumerate() {
            out.row_mut(orig).copy_from_slice(v.row(i));
        }
        out
    }

    /// Edge messages after the embedding block (`0`) or interaction block
    /// `b` (`b + 1`), rows in canonical edge order.
    pub fn messages(&self, stage: usize) -> &Matrix {
        self.tape.value(self.messages[stage])
    }

    pub fn tape(&self) -> &Tape {
        &self.tape
    }
}

/// The network for one [`RunConfig`]: basis tables plus the parameter layout.
#[derive(Debug, Clone)]
pub struct Model {
    cfg: RunConfig,
    tables: BasisTables,
    layout: Arc<Layout>,
    arch: Architecture,
}

impl Model {
    pub fn new(cfg: &RunConfig) -> Result<Self, NetworkError> {
        cfg.validate()?;
        let tables = BasisTables::from_config(cfg)?;
        let (arch, layout) = build_architecture(cfg, &tables);
        Ok(Self { cfg: cfg.clone(), tables, layout: Arc::new(layout), arch })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn tables(&self) -> &BasisTables {
        &self.tables
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub(crate) fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn init_params(&self, seed: u64) -> ModelParams {
        ModelParams::init(self.layout.clone(), seed)
    }

    fn check_params(&self, params: &ModelParams) -> Result<(), NetworkError> {
        if params.layout().as_ref() != self.layout.as_ref() {
            return Err(NetworkError::Shape("parameters belong to a different architecture".into()));
        }
        Ok(())
    }

    pub fn featurize(&self, g: &Graph3D) -> Result<GraphFeatures, NetworkError> {
        let order = canonical_order(g);
        let canon = g.permuted(&order);
        let geometry = compute_geometry(&canon, self.cfg.cutoff_c)?;
        let t = &self.tables;
        let m = geometry.edges.len();
        let mut rbf = Matrix::zeros(m, t.rbf_len());
        for k in 0..m {
            t.rbf_into(geometry.edges.distances[k], rbf.row_mut(k));
        }
        let pairs = geometry.pairs.len();
        let mode = self.cfg.ablation_mode;
        let sbf = mode.uses_angle().then(|| {
            let mut s = Matrix::zeros(pairs, t.sbf_len());
            for p in 0..pairs {
                t.sbf_into(geometry.pair_distance(p), geometry.theta[p], s.row_mut(p));
            }
            s
        });
        let tbf = mode.uses_torsion().then(|| {
            let mut s = Matrix::zeros(pairs, t.tbf_len());
            for p in 0..pairs {
                t.tbf_into(geometry.pair_distance(p), geometry.theta[p], geometry.phi[p], s.row_mut(p));
            }
            s
        });
        let atomic_numbers = canon.atomic_numbers().iter().map(|&z| z as usize).collect();
        Ok(GraphFeatures { order, atomic_numbers, geometry, rbf, sbf, tbf })
    }

    pub fn forward(&self, params: &ModelParams, f: &GraphFeatures) -> Result<Forward, NetworkError> {
        self.check_params(params)?;
        let arch = &self.arch;
        let edges = &f.geometry.edges;
        let pairs = &f.geometry.pairs;
        let (n, m) = (f.num_atoms(), edges.len());
        let mut tape = Tape::new();
        let mut mark = 0;
        let check = |tape: &Tape, stage: usize, mark: &mut usize| -> Result<(), NetworkError> {
            for id in *mark..tape.len() {
                if !tape.value(id).is_finite() {
                    return Err(NetworkError::NonFinite { block: stage });
                }
            }
            *mark = tape.len();
            Ok(())
        };

        let rbf = tape.leaf(f.rbf.clone());
        let sbf = f.sbf.as_ref().map(|s| tape.leaf(s.clone()));
        let tbf = f.tbf.as_ref().map(|s| tape.leaf(s.clone()));

        // embedding block
        let zs: Vec<usize> = edges.senders.iter().map(|&s| f.atomic_numbers[s]).collect();
        let zr: Vec<usize> = edges.receivers.iter().map(|&r| f.atomic_numbers[r]).collect();
        let a_s = tape.embed(params, arch.table, &zs);
        let a_r = tape.embed(params, arch.table, &zr);
        let rb = lb2(&mut tape, params, rbf, arch.embed_rbf);
        let cat = tape.concat(&[a_s, a_r, rb]);
        let mut e = dense(&mut tape, params, cat, arch.merge);
        e = tape.swish(e);
        check(&tape, 0, &mut mark)?;
        let mut messages = vec![e];

        for (bi, blk) in arch.blocks.iter().enumerate() {
            let s = dense(&mut tape, params, e, blk.ji);
            let s = tape.swish(s);
            let mut h = e;
            for l in &blk.pre {
                h = dense(&mut tape, params, h, *l);
                h = tape.swish(h);
            }
            let p = tape.linear(params, h, blk.down, None);
            let p = tape.swish(p);
            let pj = tape.gather(p, &pairs.j);
            let dist = lb2(&mut tape, params, rbf, blk.distance);
            let mut gate = tape.gather(dist, &pairs.j);
            if let (Some(ids), Some(x)) = (blk.angle, sbf) {
                let a = lb2(&mut tape, params, x, ids);
                gate = tape.add(gate, a);
            }
            if let (Some(ids), Some(x)) = (blk.torsion, tbf) {
                let t = lb2(&mut tape, params, x, ids);
                gate = tape.add(gate, t);
            }
            let msg = tape.mul(pj, gate);
            let agg = tape.scatter_add(msg, &pairs.k, m);
            let up = tape.linear(params, agg, blk.up, None);
            let up = tape.swish(up);
            let mut x = tape.add(s, up);
            x = dense(&mut tape, params, x, blk.skip);
            x = tape.swish(x);
            x = tape.add(x, e);
            for [l1, l2] in &blk.residual {
                let r = dense(&mut tape, params, x, *l1);
                let r = tape.swish(r);
                let r = dense(&mut tape, params, r, *l2);
                let r = tape.swish(r);
                x = tape.add(x, r);
            }
            e = x;
            check(&tape, bi + 1, &mut mark)?;
            messages.push(e);
        }

        // output block
        let go = lb2(&mut tape, params, rbf, arch.out_rbf);
        let ge = tape.mul(go, e);
        let agg = tape.scatter_add(ge, &edges.receivers, n);
        let v = dense(&mut tape, params, agg, arch.out_v);
        let v = tape.swish(v);
        let hdn = dense(&mut tape, params, v, arch.out_hidden);
        let hdn = tape.swish(hdn);
        let y = dense(&mut tape, params, hdn, arch.out_final);
        let output = tape.scatter_add(y, &vec![0; n], 1);
        check(&tape, arch.blocks.len() + 1, &mut mark)?;
        Ok(Forward { tape, output, node_out: y, node_features: v, messages, order: f.order.clone() })
    }

    /// Accumulate `upstream · ∂u'/∂θ` into `grads`.
    pub fn backward(&self, params: &ModelParams, fwd: &Forward, upstream: f64, grads: &mut Gradients) {
        fwd.tape
            .backward(params, fwd.output, Matrix::from_vec(1, 1, vec![upstream]), grads);
    }

    pub fn predict(&self, params: &ModelParams, g: &Graph3D) -> Result<f64, NetworkError> {
        let f = self.featurize(g)?;
        Ok(self.forward(params, &f)?.energy())
    }
}

fn dense(tape: &mut Tape, params: &ModelParams, x: NodeId, l: Lin) -> NodeId {
    tape.linear(params, x, l.w, l.b)
}

fn lb2(tape: &mut Tape, params: &ModelParams, x: NodeId, ids: Lb2) -> NodeId {
    let mid = tape.linear(params, x, ids.down, None);
    tape.linear(params, mid, ids.up, None)
}
