use alloc::string::String;
use alloc::vec::Vec;

use super::Partition;
use crate::error::{Error, Result};

/// Window-by-node table: `rows[w][j]` is true when node `j` shares the
/// anchor's community in window `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoMembership {
    pub anchor: String,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<bool>>,
}

/// Tracks which nodes sit in the anchor's community across windows. Columns
/// follow the node order of the first partition; later partitions may list
/// the same nodes in another order.
pub fn cluster_track(partitions: &[Partition], anchor: &str) -> Result<CoMembership> {
    let Some(first) = partitions.first() else {
        return Ok(CoMembership {
            anchor: anchor.into(),
            labels: Vec::new(),
            rows: Vec::new(),
        });
    };
    let labels = first.labels.clone();
    if !labels.iter().any(|l| l == anchor) {
        return Err(Error::UnknownLabel(anchor.into()));
    }
    let mut rows = Vec::with_capacity(partitions.len());
    for (w, p) in partitions.iter().enumerate() {
        if p.labels.len() != labels.len() {
            return Err(Error::InconsistentNodes(w));
        }
        let anchor_comm = p.community_of(anchor).ok_or(Error::InconsistentNodes(w))?;
        let row = labels
            .iter()
            .map(|l| {
                p.community_of(l)
                    .map(|c| c == anchor_comm)
                    .ok_or(Error::InconsistentNodes(w))
            })
            .collect::<Result<Vec<bool>>>()?;
        rows.push(row);
    }
    Ok(CoMembership {
        anchor: anchor.into(),
        labels,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn part(labels: &[&str], membership: &[usize]) -> Partition {
        Partition {
            labels: labels.iter().map(|s| String::from(*s)).collect(),
            membership: membership.to_vec(),
            modularity: 0.0,
        }
    }

    #[test]
    fn same_community() {
        let t = cluster_track(&[part(&["A", "B", "C"], &[0, 0, 1])], "A").unwrap();
        assert_eq!(t.rows, [[true, true, false]]);
    }

    #[test]
    fn singleton_anchor() {
        let t = cluster_track(&[part(&["A", "B", "C"], &[0, 1, 1])], "A").unwrap();
        assert_eq!(t.rows, [[true, false, false]]);
    }

    #[test]
    fn three_windows_fixture() {
        let windows = [
            part(&["BTC", "ETH", "XRP", "ADA"], &[0, 0, 1, 1]),
            part(&["BTC", "ETH", "XRP", "ADA"], &[0, 1, 0, 2]),
            // same nodes, different order
            part(&["ADA", "XRP", "ETH", "BTC"], &[0, 0, 0, 1]),
        ];
        let t = cluster_track(&windows, "ETH").unwrap();
        assert_eq!(
            t.rows,
            vec![
                vec![true, true, false, false],
                vec![false, true, false, false],
                vec![false, true, true, true],
            ]
        );
    }

    #[test]
    fn errors() {
        let p = part(&["A", "B"], &[0, 0]);
        assert_eq!(cluster_track(std::slice::from_ref(&p), "Z"), Err(Error::UnknownLabel("Z".into())));
        let q = part(&["A", "C"], &[0, 0]);
        assert_eq!(cluster_track(&[p, q], "A"), Err(Error::InconsistentNodes(1)));
    }
}
