//! Worked panel-tree examples at a given prime.

use num_bigint::BigInt;
use serde::Serialize;

use crate::building::Flag;
use crate::error::Result;
use crate::padic::{Matrix2, Prime, Rational};
use crate::panel_tree::{
    bary_ends, bary_objective, beta_eps, measure_pushforward, PanelTree, TreeEnd, TreePoint, TreeVertex,
};

#[derive(Debug, Serialize)]
pub struct RoundTrip {
    pub end: TreeEnd,
    pub chamber: Flag,
    pub recovered: bool,
}

#[derive(Debug, Serialize)]
pub struct BaryExample {
    pub ends: Vec<TreeEnd>,
    pub barycenter: TreePoint,
    /// F_S at the barycenter, exact.
    pub objective: String,
}

#[derive(Debug, Serialize)]
pub struct TreeDemo {
    pub prime: u64,
    pub round_trips: Vec<RoundTrip>,
    pub bary: Vec<BaryExample>,
    pub beta_two_atoms: TreePoint,
    pub pushforward: Vec<(TreePoint, String)>,
}

pub fn tree_demo(p: Prime) -> Result<TreeDemo> {
    let pi = p.get() as i64;
    let e1: [BigInt; 3] = [1.into(), 0.into(), 0.into()];
    let tree = PanelTree::at_line(p, &e1)?;
    let mut reps: Vec<[i64; 2]> = (0..pi).map(|a| [1, a]).collect();
    reps.extend([[0, 1], [1, pi], [pi, 1], [1, pi * pi + 1]]);
    let round_trips = reps
        .iter()
        .map(|&r| {
            let end = TreeEnd::from_ints(r)?;
            let chamber = tree.end_chamber(&end);
            let recovered = tree.chamber_end(&chamber)? == end;
            Ok(RoundTrip {
                end,
                chamber,
                recovered,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let end_sets: Vec<Vec<[i64; 2]>> = vec![
        vec![[1, 0], [0, 1], [1, 1]],
        vec![[1, 0], [0, 1], [1, pi]],
        vec![[1, 0], [0, 1], [1, 1], [1, pi]],
    ];
    let bary = end_sets
        .into_iter()
        .map(|set| {
            let ends = set.into_iter().map(TreeEnd::from_ints).collect::<Result<Vec<_>>>()?;
            let barycenter = bary_ends(p, &ends)?;
            let objective = crate::padic::format_rational(&bary_objective(&ends, &barycenter));
            Ok(BaryExample {
                ends,
                barycenter,
                objective,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let half = Rational::new(1.into(), 2.into());
    let a = TreeVertex::base(p);
    let b = TreeVertex::from_basis(p, &Matrix2::p_diagonal(p, [0, 2]))?;
    let beta_two_atoms = beta_eps(
        &[(TreePoint::vertex(a), half.clone()), (TreePoint::vertex(b), half)],
        &Rational::new(1.into(), 4.into()),
    )?;

    let quarter = Rational::new(1.into(), 4.into());
    let nu = [[1, 0], [0, 1], [1, 1], [1, pi]]
        .into_iter()
        .map(|r| Ok((TreeEnd::from_ints(r)?, quarter.clone())))
        .collect::<Result<Vec<_>>>()?;
    let pushforward = measure_pushforward(p, &nu)?
        .into_iter()
        .map(|(x, w)| (x, crate::padic::format_rational(&w)))
        .collect();

    Ok(TreeDemo {
        prime: p.get(),
        round_trips,
        bary,
        beta_two_atoms,
        pushforward,
    })
}
