use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{NodeKey, WideGraph};
use crate::ingest::InteractionKind;
use crate::{Error, Result};

/// Fractions of first parties linking to a third-party node, kept as exact counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    /// Roots with a non-`Bounced` edge to the node.
    pub direct_roots: usize,
    /// Roots with any edge to the node, `Bounced` included.
    pub indirect_roots: usize,
    pub total_roots: usize,
}

impl Coverage {
    pub fn direct(&self) -> f64 {
        ratio(self.direct_roots, self.total_roots)
    }

    pub fn indirect(&self) -> f64 {
        ratio(self.indirect_roots, self.total_roots)
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

impl WideGraph {
    /// Direct and indirect coverage of a third-party node.
    ///
    /// Indirect coverage comes from root edges, which already encode per-site
    /// reachability through edge expansion. Paths in the merged graph can
    /// stitch together edges from different sites, so they are not used.
    pub fn coverage(&self, node: &NodeKey) -> Result<Coverage> {
        if !self.nodes.contains_key(node) {
            return Err(Error::UnknownNode(node.to_string()));
        }
        if node.is_first_party() {
            return Err(Error::FirstPartyNode(node.to_string()));
        }
        let mut direct = BTreeSet::new();
        let mut indirect = BTreeSet::new();
        for key in self.edges.keys() {
            if &key.dst == node {
                if let NodeKey::FirstParty(root) = &key.src {
                    indirect.insert(root);
                    if key.label != InteractionKind::Bounced {
                        direct.insert(root);
                    }
                }
            }
        }
        Ok(Coverage {
            direct_roots: direct.len(),
            indirect_roots: indirect.len(),
            total_roots: self.roots.len(),
        })
    }

    /// Coverage of every third-party node in one pass over the edges.
    pub fn coverage_all(&self) -> BTreeMap<&NodeKey, Coverage> {
        let mut sets: BTreeMap<&NodeKey, (BTreeSet<&str>, BTreeSet<&str>)> =
            self.third_party_nodes().map(|k| (k, Default::default())).collect();
        for key in self.edges.keys() {
            if let (NodeKey::FirstParty(root), Some(entry)) = (&key.src, sets.get_mut(&key.dst)) {
                entry.1.insert(root);
                if key.label != InteractionKind::Bounced {
                    entry.0.insert(root);
                }
            }
        }
        let total = self.roots.len();
        sets.into_iter()
            .map(|(k, (d, i))| {
                (
                    k,
                    Coverage {
                        direct_roots: d.len(),
                        indirect_roots: i.len(),
                        total_roots: total,
                    },
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::tree;
    use super::*;
    use InteractionKind::*;

    #[test]
    fn three_root_fixture() {
        // r1 embeds T directly, r2 reaches it through A, r3 never sees it.
        let r1 = tree("r1.com", &[("https://t.net/t.js", Script)], &[(None, 0)]);
        let r2 = tree(
            "r2.com",
            &[("https://a.net/a.js", Script), ("https://t.net/t.js", Script)],
            &[(None, 0), (Some(0), 1)],
        );
        let r3 = tree("r3.com", &[("https://a.net/a.js", Script)], &[(None, 0)]);
        let g = WideGraph::from_trees([&r1, &r2, &r3]).unwrap();
        let t = NodeKey::third_party("t.net", Script);
        let c = g.coverage(&t).unwrap();
        assert_eq!((c.direct_roots, c.indirect_roots, c.total_roots), (1, 2, 3));
        assert!((c.direct() - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.indirect() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.coverage_all()[&t], c);

        let a = g.coverage(&NodeKey::third_party("a.net", Script)).unwrap();
        assert_eq!((a.direct_roots, a.indirect_roots), (2, 2));
    }

    #[test]
    fn everywhere_direct_is_one() {
        let trees: Vec<_> = ["a.com", "b.com"]
            .iter()
            .map(|r| tree(r, &[("https://t.net/t.js", Script)], &[(None, 0)]))
            .collect();
        let g = WideGraph::from_trees(&trees).unwrap();
        let c = g.coverage(&NodeKey::third_party("t.net", Script)).unwrap();
        assert_eq!(c.direct(), 1.0);
        assert_eq!(c.indirect(), 1.0);
    }

    #[test]
    fn errors() {
        let g = WideGraph::from_trees([&tree("a.com", &[("https://t.net/t.js", Script)], &[(None, 0)])]).unwrap();
        assert!(matches!(
            g.coverage(&NodeKey::third_party("nope.net", Script)),
            Err(Error::UnknownNode(_))
        ));
        assert!(matches!(
            g.coverage(&NodeKey::FirstParty("a.com".into())),
            Err(Error::FirstPartyNode(_))
        ));
    }
}
