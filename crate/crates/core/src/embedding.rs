//! CBOW-style paper embeddings.
//!
//! The hidden layer is the mean of the input rows of a target's context;
//! logits are `W_out · h` and the target is scored by softmax over every
//! paper. Training runs plain SGD either on the exact softmax loss or on the
//! negative-sampling surrogate, with a linearly decaying learning rate.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{CitationGraph, NodeIdx};
use crate::rng::{self, TAG_INIT, TAG_TRAIN};
use crate::sampling::WalkCorpus;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    ExactSoftmax,
    NegativeSampling { negatives: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub dim: usize,
    /// Context positions taken on each side of the target.
    pub window: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub objective: Objective,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            dim: 128,
            window: 10,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate: 0.0001,
            objective: Objective::ExactSoftmax,
            seed: 42,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 || self.window < 1 {
            return Err(Error::InvalidParam("dim and window must be >= 1".into()));
        }
        if !(self.learning_rate > self.min_learning_rate && self.min_learning_rate >= 0.0) {
            return Err(Error::InvalidParam(
                "learning rate must exceed its floor, floor must be >= 0".into(),
            ));
        }
        if let Objective::NegativeSampling { negatives: 0 } = self.objective {
            return Err(Error::InvalidParam("negatives must be >= 1".into()));
        }
        Ok(())
    }
}

/// Input and output parameter matrices over a fixed vocabulary, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    tokens: Vec<String>,
    lookup: HashMap<String, NodeIdx>,
    dim: usize,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl EmbeddingModel {
    pub fn from_parts(
        tokens: Vec<String>,
        dim: usize,
        input: Vec<f64>,
        output: Vec<f64>,
    ) -> Result<Self> {
        let n = tokens.len();
        if dim == 0 || input.len() != n * dim || output.len() != n * dim {
            return Err(Error::InvalidParam(format!(
                "matrix shapes do not match {n} x {dim}"
            )));
        }
        let lookup = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as NodeIdx))
            .collect();
        Ok(EmbeddingModel {
            tokens,
            lookup,
            dim,
            input,
            output,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<NodeIdx> {
        self.lookup.get(token).copied()
    }

    /// Embedding `E_v`.
    #[inline]
    pub fn input_row(&self, v: NodeIdx) -> &[f64] {
        let s = v as usize * self.dim;
        &self.input[s..s + self.dim]
    }

    #[inline]
    pub fn output_row(&self, v: NodeIdx) -> &[f64] {
        let s = v as usize * self.dim;
        &self.output[s..s + self.dim]
    }

    pub fn input_row_mut(&mut self, v: NodeIdx) -> &mut [f64] {
        let s = v as usize * self.dim;
        &mut self.input[s..s + self.dim]
    }

    pub fn output_row_mut(&mut self, v: NodeIdx) -> &mut [f64] {
        let s = v as usize * self.dim;
        &mut self.output[s..s + self.dim]
    }

    pub fn input_matrix(&self) -> &[f64] {
        &self.input
    }

    pub fn output_matrix(&self) -> &[f64] {
        &self.output
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }

    /// True when the vocabulary is exactly the node set of `g`, in index order.
    pub fn matches_graph(&self, g: &CitationGraph) -> bool {
        self.tokens.as_slice() == g.tokens()
    }

    pub fn check_ids(&self, ids: &[NodeIdx]) -> Result<()> {
        match ids.iter().find(|&&v| v as usize >= self.len()) {
            Some(&v) => Err(Error::UnknownIndex(v)),
            None => Ok(()),
        }
    }

    /// Mean of the input rows of `context`.
    pub fn hidden(&self, context: &[NodeIdx]) -> Vec<f64> {
        let mut h = vec![0.0; self.dim];
        for &c in context {
            for (a, b) in h.iter_mut().zip(self.input_row(c)) {
                *a += b;
            }
        }
        let inv = 1.0 / context.len() as f64;
        h.iter_mut().for_each(|x| *x *= inv);
        h
    }

    pub fn logits(&self, h: &[f64]) -> Vec<f64> {
        (0..self.len() as NodeIdx)
            .map(|i| dot(self.output_row(i), h))
            .collect()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place softmax with max-logit subtraction.
pub fn softmax(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for y in logits.iter_mut() {
        *y = (*y - max).exp();
        z += *y;
    }
    logits.iter_mut().for_each(|y| *y /= z);
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// A target paper and the multiset of papers around it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextWindow {
    pub target: NodeIdx,
    pub context: Vec<NodeIdx>,
}

fn fill_context(line: &[NodeIdx], pos: usize, w: usize, out: &mut Vec<NodeIdx>) {
    out.clear();
    let target = line[pos];
    let lo = pos.saturating_sub(w);
    let hi = (pos + w).min(line.len() - 1);
    for (j, &v) in line.iter().enumerate().take(hi + 1).skip(lo) {
        // repeated occurrences of the target itself are not context
        if j != pos && v != target {
            out.push(v);
        }
    }
}

/// Sliding windows of half-width `w` over every line. Windows whose context
/// comes out empty are skipped.
pub fn extract_windows(lines: &[Vec<NodeIdx>], w: usize) -> impl Iterator<Item = ContextWindow> + '_ {
    lines.iter().flat_map(move |line| {
        (0..line.len()).filter_map(move |pos| {
            let mut context = Vec::new();
            fill_context(line, pos, w, &mut context);
            (!context.is_empty()).then_some(ContextWindow {
                target: line[pos],
                context,
            })
        })
    })
}

/// Softmax distribution over all papers given `context`.
pub fn forward(m: &EmbeddingModel, context: &[NodeIdx]) -> Result<Vec<f64>> {
    if context.is_empty() {
        return Err(Error::InvalidParam("empty context".into()));
    }
    m.check_ids(context)?;
    let mut y = m.logits(&m.hidden(context));
    softmax(&mut y);
    Ok(y)
}

/// `-log Pr(target | context)` under the exact softmax.
pub fn window_loss(m: &EmbeddingModel, w: &ContextWindow) -> Result<f64> {
    m.check_ids(&[w.target])?;
    let probs = forward(m, &w.context)?;
    Ok(-probs[w.target as usize].ln())
}

/// Gradient of the exact softmax loss for one window.
#[derive(Debug, Clone)]
pub struct Gradient {
    /// Per distinct context paper, the gradient of its input row.
    pub input: Vec<(NodeIdx, Vec<f64>)>,
    /// Full `N x d` gradient of the output matrix.
    pub output: Vec<f64>,
}

pub fn exact_gradient(m: &EmbeddingModel, w: &ContextWindow) -> Result<(f64, Gradient)> {
    m.check_ids(&[w.target])?;
    let d = m.dim;
    let h = m.hidden(&w.context);
    let mut g = m.logits(&h);
    softmax(&mut g);
    let loss = -g[w.target as usize].ln();
    g[w.target as usize] -= 1.0;

    let mut output = vec![0.0; m.len() * d];
    let mut grad_h = vec![0.0; d];
    for (i, &gi) in g.iter().enumerate() {
        let row = &mut output[i * d..(i + 1) * d];
        for k in 0..d {
            row[k] = gi * h[k];
        }
        for (acc, o) in grad_h.iter_mut().zip(m.output_row(i as NodeIdx)) {
            *acc += gi * o;
        }
    }
    let mut counts: Vec<(NodeIdx, usize)> = Vec::new();
    for &c in &w.context {
        match counts.iter_mut().find(|(v, _)| *v == c) {
            Some((_, n)) => *n += 1,
            None => counts.push((c, 1)),
        }
    }
    let n_ctx = w.context.len() as f64;
    let input = counts
        .into_iter()
        .map(|(c, n)| (c, grad_h.iter().map(|x| x * n as f64 / n_ctx).collect()))
        .collect();
    Ok((loss, Gradient { input, output }))
}

/// Fresh model over the nodes of `g`: `W_in` uniform in `(-0.5/d, 0.5/d)`, `W_out` zero.
pub fn init_model(g: &CitationGraph, params: &TrainParams) -> Result<EmbeddingModel> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if params.dim < 1 {
        return Err(Error::InvalidParam("dim must be >= 1".into()));
    }
    let d = params.dim;
    let bound = 0.5 / d as f64;
    let mut r = rng::stream(params.seed, &[TAG_INIT]);
    let input = (0..g.node_count() * d)
        .map(|_| r.gen_range(-bound..bound))
        .collect();
    EmbeddingModel::from_parts(g.tokens().to_vec(), d, input, vec![0.0; g.node_count() * d])
}

/// Result of [`train_with_history`]: the model and mean loss per epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: EmbeddingModel,
    pub epoch_loss: Vec<f64>,
}

pub fn train(model: EmbeddingModel, corpus: &WalkCorpus, params: &TrainParams) -> Result<EmbeddingModel> {
    train_with_history(model, corpus, params).map(|o| o.model)
}

/// Sequential SGD over shuffled windows, deterministic for a fixed seed.
pub fn train_with_history(
    mut model: EmbeddingModel,
    corpus: &WalkCorpus,
    params: &TrainParams,
) -> Result<TrainOutcome> {
    params.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidParam("corpus is empty".into()));
    }
    for line in &corpus.lines {
        model.check_ids(line)?;
    }
    let mut positions: Vec<(u32, u32)> = Vec::new();
    let mut ctx = Vec::new();
    for (li, line) in corpus.lines.iter().enumerate() {
        for pos in 0..line.len() {
            fill_context(line, pos, params.window, &mut ctx);
            if !ctx.is_empty() {
                positions.push((li as u32, pos as u32));
            }
        }
    }

    let noise = match params.objective {
        Objective::NegativeSampling { .. } => {
            let weights: Vec<f64> = corpus
                .frequencies(model.len())
                .iter()
                .map(|&f| (f as f64).powf(0.75))
                .collect();
            Some(WeightedIndex::new(&weights).map_err(|e| Error::InvalidParam(e.to_string()))?)
        }
        Objective::ExactSoftmax => None,
    };

    let mut rng = rng::stream(params.seed, &[TAG_TRAIN]);
    let total = (params.epochs * positions.len()).max(1) as f64;
    let mut step: u64 = 0;
    let mut epoch_loss = Vec::with_capacity(params.epochs);
    let d = model.dim;
    let mut scratch = Scratch {
        h: vec![0.0; d],
        grad_h: vec![0.0; d],
        logits: vec![0.0; model.len()],
    };

    for _ in 0..params.epochs {
        positions.shuffle(&mut rng);
        let mut sum = 0.0;
        for &(li, pos) in &positions {
            let line = &corpus.lines[li as usize];
            fill_context(line, pos as usize, params.window, &mut ctx);
            let lr = params.learning_rate
                - (params.learning_rate - params.min_learning_rate) * step as f64 / total;
            let target = line[pos as usize];
            let loss = match (&noise, params.objective) {
                (Some(noise), Objective::NegativeSampling { negatives }) => {
                    ns_step(&mut model, target, &ctx, negatives, noise, lr, &mut rng, &mut scratch)
                }
                _ => exact_step(&mut model, target, &ctx, lr, &mut scratch),
            };
            if !loss.is_finite() {
                return Err(Error::NonFinite {
                    step,
                    learning_rate: lr,
                });
            }
            sum += loss;
            step += 1;
        }
        epoch_loss.push(sum / positions.len().max(1) as f64);
    }
    Ok(TrainOutcome { model, epoch_loss })
}

struct Scratch {
    h: Vec<f64>,
    grad_h: Vec<f64>,
    logits: Vec<f64>,
}

fn fill_hidden(model: &EmbeddingModel, ctx: &[NodeIdx], h: &mut [f64]) {
    h.fill(0.0);
    for &c in ctx {
        for (a, b) in h.iter_mut().zip(model.input_row(c)) {
            *a += b;
        }
    }
    let inv = 1.0 / ctx.len() as f64;
    h.iter_mut().for_each(|x| *x *= inv);
}

fn apply_input_update(model: &mut EmbeddingModel, ctx: &[NodeIdx], grad_h: &[f64], lr: f64) {
    let scale = lr / ctx.len() as f64;
    for &c in ctx {
        for (w, g) in model.input_row_mut(c).iter_mut().zip(grad_h) {
            *w -= scale * g;
        }
    }
}

fn exact_step(
    model: &mut EmbeddingModel,
    target: NodeIdx,
    ctx: &[NodeIdx],
    lr: f64,
    s: &mut Scratch,
) -> f64 {
    fill_hidden(model, ctx, &mut s.h);
    for (i, y) in s.logits.iter_mut().enumerate() {
        *y = dot(model.output_row(i as NodeIdx), &s.h);
    }
    softmax(&mut s.logits);
    let loss = -s.logits[target as usize].ln();
    s.logits[target as usize] -= 1.0;
    s.grad_h.fill(0.0);
    for (i, &gi) in s.logits.iter().enumerate() {
        let row = model.output_row_mut(i as NodeIdx);
        for k in 0..row.len() {
            s.grad_h[k] += gi * row[k];
            row[k] -= lr * gi * s.h[k];
        }
    }
    apply_input_update(model, ctx, &s.grad_h, lr);
    loss
}

#[allow(clippy::too_many_arguments)]
fn ns_step(
    model: &mut EmbeddingModel,
    target: NodeIdx,
    ctx: &[NodeIdx],
    negatives: usize,
    noise: &WeightedIndex<f64>,
    lr: f64,
    rng: &mut impl Rng,
    s: &mut Scratch,
) -> f64 {
    fill_hidden(model, ctx, &mut s.h);
    s.grad_h.fill(0.0);
    let mut loss = 0.0;
    for k in 0..=negatives {
        let (node, label) = if k == 0 {
            (target, 1.0)
        } else {
            let v = noise.sample(rng) as NodeIdx;
            if v == target {
                continue;
            }
            (v, 0.0)
        };
        let row = model.output_row_mut(node);
        let f = sigmoid(dot(row, &s.h));
        loss -= if label > 0.0 { f.ln() } else { (1.0 - f).ln() };
        let g = f - label;
        for i in 0..row.len() {
            s.grad_h[i] += g * row[i];
            row[i] -= lr * g * s.h[i];
        }
    }
    apply_input_update(model, ctx, &s.grad_h, lr);
    loss
}

fn write_matrix<W: Write>(tokens: &[String], dim: usize, data: &[f64], out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{} {}", tokens.len(), dim)?;
    for (t, row) in tokens.iter().zip(data.chunks(dim)) {
        out.write_all(t.as_bytes())?;
        for x in row {
            write!(out, " {x:.9e}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

struct Matrix {
    tokens: Vec<String>,
    dim: usize,
    data: Vec<f64>,
}

fn read_matrix<R: BufRead>(input: R, name: &str) -> Result<Matrix> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(name, 1, "missing `N d` header"))??;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|x| x.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::parse(name, 1, format!("bad header `{header}`")))?;
    let [n, dim] = dims[..] else {
        return Err(Error::parse(name, 1, format!("bad header `{header}`")));
    };
    let mut tokens = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        if tokens.len() == n {
            return Err(Error::parse(
                name,
                lineno,
                format!("expected {n} rows, found more"),
            ));
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap_or_default().to_string();
        let before = data.len();
        for f in fields {
            data.push(
                f.parse::<f64>()
                    .map_err(|_| Error::parse(name, lineno, format!("bad number `{f}`")))?,
            );
        }
        if data.len() - before != dim {
            return Err(Error::parse(
                name,
                lineno,
                format!("expected {dim} values, found {}", data.len() - before),
            ));
        }
        tokens.push(token);
    }
    if tokens.len() != n {
        return Err(Error::parse(
            name,
            tokens.len() + 2,
            format!("expected {n} rows, found {}", tokens.len()),
        ));
    }
    Ok(Matrix { tokens, dim, data })
}

/// Writes `W_in` and `W_out` in the `N d` + one-row-per-paper text layout.
pub fn write_model<W1: Write, W2: Write>(m: &EmbeddingModel, input: W1, output: W2) -> Result<()> {
    write_matrix(&m.tokens, m.dim, &m.input, input)?;
    write_matrix(&m.tokens, m.dim, &m.output, output)
}

pub fn read_model<R1: BufRead, R2: BufRead>(input: R1, output: R2) -> Result<EmbeddingModel> {
    let a = read_matrix(input, "input matrix")?;
    let b = read_matrix(output, "output matrix")?;
    if a.tokens != b.tokens || a.dim != b.dim {
        return Err(Error::parse(
            "output matrix",
            1,
            "vocabulary or dimension differs from input matrix",
        ));
    }
    EmbeddingModel::from_parts(a.tokens, a.dim, a.data, b.data)
}

pub fn save_model(m: &EmbeddingModel, input: &Path, output: &Path) -> Result<()> {
    write_model(m, File::create(input)?, File::create(output)?)
}

pub fn load_model(input: &Path, output: &Path) -> Result<EmbeddingModel> {
    read_model(
        BufReader::new(File::open(input)?),
        BufReader::new(File::open(output)?),
    )
}
