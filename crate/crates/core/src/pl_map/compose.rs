use crate::arc::Arc;
use crate::error::{structural, Error, Result};
use crate::scalar::{self, Scalar};
use crate::tree::TreePoint;

use super::{Knot, PlMap, Shared};

/// Exact PL representation of `g ∘ f`.
///
/// Every piece of `f` runs along an image arc; the composite breaks it
/// wherever that arc crosses a vertex or a knot of `g`, i.e. at the exact
/// preimages of `g`'s breakpoints, solved as one linear equation each.
pub fn compose<S: Scalar>(g: &PlMap<S>, f: &PlMap<S>, piece_cap: usize) -> Result<PlMap<S>> {
    if !Shared::ptr_eq(&g.tree, &f.tree) && *g.tree != *f.tree {
        return Err(structural("composed maps must share their domain tree"));
    }
    let tree = &f.tree;
    let mut total = 0usize;
    let mut pieces = Vec::with_capacity(f.pieces.len());
    for knots in &f.pieces {
        let mut out: Vec<Knot<S>> = vec![Knot::new(knots[0].t.clone(), g.evaluate(&knots[0].image))];
        for w in knots.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let arc = Arc::between(tree, &a.image, &b.image);
            if !arc.is_degenerate() {
                let span = b.t.clone() - a.t.clone();
                let len = arc.length().clone();
                let mut cuts: Vec<S> = Vec::new();
                for (i, seg) in arc.segments().iter().enumerate() {
                    let off = arc.offset(i).clone();
                    let edge_len = tree.edge(seg.edge).length.clone();
                    let mut local: Vec<S> = g.pieces[seg.edge.0]
                        .iter()
                        .filter(|k| seg.lo() < &k.t && &k.t < seg.hi())
                        .map(|k| off.clone() + (k.t.clone() - seg.from.clone()).abs() * edge_len.clone())
                        .collect();
                    local.sort_by(scalar::cmp);
                    cuts.extend(local);
                    if i + 1 < arc.segments().len() {
                        cuts.push(off + arc.segment_length(i).clone());
                    }
                }
                for s in cuts {
                    let t = a.t.clone() + s.clone() / len.clone() * span.clone();
                    out.push(Knot::new(t, g.evaluate(&arc.point_at(tree, &s))));
                }
            }
            out.push(Knot::new(b.t.clone(), g.evaluate(&b.image)));
        }
        total += out.len() - 1;
        if total > piece_cap {
            return Err(Error::Resource { what: "composition piece count".into(), cap: piece_cap as u64 });
        }
        pieces.push(out);
    }
    let vertex_images: Vec<TreePoint<S>> = f.vertex_images.iter().map(|p| g.evaluate(p)).collect();
    Ok(PlMap::from_normalized_parts(f.tree.clone(), vertex_images, pieces))
}

/// `f^n`, with `f^0` the identity.
pub fn iterate<S: Scalar>(f: &PlMap<S>, n: u64, piece_cap: usize) -> Result<PlMap<S>> {
    let mut result: Option<PlMap<S>> = None;
    let mut base = f.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => compose(&base, &r, piece_cap)?,
            });
        }
        k >>= 1;
        if k > 0 {
            base = compose(&base, &base, piece_cap)?;
        }
    }
    Ok(result.unwrap_or_else(|| PlMap::identity(f.tree.clone())))
}
