use crate::arc::Arc;
use crate::scalar::{self, Scalar};
use crate::subtree::{Subtree, SubtreeBuilder};
use crate::tree::{EdgeId, TreePoint};

use super::PlMap;

/// Fixed points of `f`, one linear equation per (piece, image segment on
/// the same edge) pair.
pub(super) fn fixed_points<S: Scalar>(f: &PlMap<S>) -> Subtree<S> {
    let tree = f.tree();
    let mut out = SubtreeBuilder::new();
    for v in tree.vertices() {
        if *f.vertex_image(v) == TreePoint::Vertex(v) {
            out.add_vertex(v);
        }
    }
    for e in tree.edge_ids() {
        for w in f.knots(e).windows(2) {
            solve_piece(f, e, &w[0].t, &w[1].t, &w[0].image, &w[1].image, &mut out);
        }
    }
    out.finish(tree)
}

fn solve_piece<S: Scalar>(
    f: &PlMap<S>,
    e: EdgeId,
    t0: &S,
    t1: &S,
    p: &TreePoint<S>,
    q: &TreePoint<S>,
    out: &mut SubtreeBuilder<S>,
) {
    let tree = f.tree();
    let arc = Arc::between(tree, p, q);
    if arc.is_degenerate() {
        if let TreePoint::Edge { edge, t } = p {
            if *edge == e && t0 <= t && t <= t1 {
                out.add_interval(e, t.clone(), t.clone());
            }
        }
        return;
    }
    let span = t1.clone() - t0.clone();
    let len = arc.length().clone();
    let edge_len = tree.edge(e).length.clone();
    for (i, seg) in arc.segments().iter().enumerate() {
        if seg.edge != e {
            continue;
        }
        // Parameter t maps to arc position s(t) = (t - t0)·len/span, which
        // lies on this segment at edge parameter
        // u(s) = from ± (s - offset)/edge_len.
        let off = arc.offset(i).clone();
        let sign = if seg.ascending() { S::one() } else { -S::one() };
        let slope = sign.clone() * len.clone() / (span.clone() * edge_len.clone());
        let intercept = seg.from.clone() - sign * (t0.clone() * len.clone() / span.clone() + off.clone()) / edge_len.clone();

        let ta = scalar::max(t0, &(t0.clone() + off.clone() * span.clone() / len.clone()));
        let tb = scalar::min(
            t1,
            &(t0.clone() + (off + arc.segment_length(i).clone()) * span.clone() / len.clone()),
        );
        if ta > tb {
            continue;
        }
        if slope == S::one() {
            if intercept.is_zero() {
                out.add_interval(e, ta, tb);
            }
        } else {
            let t = intercept / (S::one() - slope);
            if ta <= t && t <= tb {
                out.add_interval(e, t.clone(), t);
            }
        }
    }
}
