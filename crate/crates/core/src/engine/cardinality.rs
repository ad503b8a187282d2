//! Edmonds' blossom search for augmenting paths, one root at a time.

use std::collections::VecDeque;

/// Searches for an augmenting path from the unmatched vertex `root`.
///
/// `adj[v]` lists neighbours in ascending order; `mate[v]` is the current
/// partner. Returns the path as a vertex sequence starting at `root` and
/// ending at another unmatched vertex.
pub fn augmenting_path(adj: &[Vec<usize>], mate: &[Option<usize>], root: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut used = vec![false; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut base: Vec<usize> = (0..n).collect();
    used[root] = true;
    let mut queue = VecDeque::from([root]);

    while let Some(v) = queue.pop_front() {
        for &to in &adj[v] {
            if base[v] == base[to] || mate[v] == Some(to) {
                continue;
            }
            let to_is_outer = to == root || mate[to].is_some_and(|m| parent[m].is_some());
            if to_is_outer {
                let cur = lca(mate, &base, &parent, root, v, to);
                let mut blossom = vec![false; n];
                mark_path(mate, &base, &mut parent, &mut blossom, v, cur, to);
                mark_path(mate, &base, &mut parent, &mut blossom, to, cur, v);
                for i in 0..n {
                    if blossom[base[i]] {
                        base[i] = cur;
                        if !used[i] {
                            used[i] = true;
                            queue.push_back(i);
                        }
                    }
                }
            } else if parent[to].is_none() {
                parent[to] = Some(v);
                match mate[to] {
                    None => return Some(trace(mate, &parent, root, to)),
                    Some(next) => {
                        used[next] = true;
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    None
}

fn lca(
    mate: &[Option<usize>],
    base: &[usize],
    parent: &[Option<usize>],
    _root: usize,
    mut a: usize,
    mut b: usize,
) -> usize {
    let mut seen = vec![false; mate.len()];
    loop {
        a = base[a];
        seen[a] = true;
        match mate[a] {
            None => break,
            Some(m) => a = parent[m].expect("outer vertex has a parent"),
        }
    }
    loop {
        b = base[b];
        if seen[b] {
            return b;
        }
        b = parent[mate[b].expect("inner path")].expect("outer vertex has a parent");
    }
}

fn mark_path(
    mate: &[Option<usize>],
    base: &[usize],
    parent: &mut [Option<usize>],
    blossom: &mut [bool],
    mut v: usize,
    b: usize,
    mut child: usize,
) {
    while base[v] != b {
        let m = mate[v].expect("blossom vertex is matched");
        blossom[base[v]] = true;
        blossom[base[m]] = true;
        parent[v] = Some(child);
        child = m;
        v = parent[m].expect("outer vertex has a parent");
    }
}

fn trace(mate: &[Option<usize>], parent: &[Option<usize>], root: usize, end: usize) -> Vec<usize> {
    let mut path = vec![end];
    let mut v = end;
    loop {
        let pv = parent[v].expect("tree vertex");
        path.push(pv);
        if pv == root && mate[pv].is_none() {
            break;
        }
        match mate[pv] {
            Some(m) => {
                path.push(m);
                v = m;
            }
            None => break,
        }
    }
    path.reverse();
    path
}

/// Runs the augmenting-path loop over unmatched vertices in ascending order.
pub fn maximum(adj: &[Vec<usize>], mate: &mut [Option<usize>]) {
    for v in 0..adj.len() {
        if mate[v].is_some() {
            continue;
        }
        if let Some(path) = augmenting_path(adj, mate, v) {
            for pair in path.chunks(2) {
                mate[pair[0]] = Some(pair[1]);
                mate[pair[1]] = Some(pair[0]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adj(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut a = vec![Vec::new(); n];
        for &(u, v) in edges {
            a[u].push(v);
            a[v].push(u);
        }
        for l in &mut a {
            l.sort_unstable();
        }
        a
    }

    #[test]
    fn five_cycle_has_no_augmenting_path_at_size_two() {
        let a = adj(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
        let mut mate = vec![None; 5];
        mate[0] = Some(1);
        mate[1] = Some(0);
        mate[2] = Some(3);
        mate[3] = Some(2);
        assert!(augmenting_path(&a, &mate, 4).is_none());
    }

    #[test]
    fn path_through_blossom() {
        // triangle 1-2-3 with tails 0-1 and 3-4; 1-2 matched, 0 and 4 free
        let a = adj(6, &[(0, 1), (1, 2), (2, 3), (1, 3), (3, 4), (4, 5)]);
        let mut mate = vec![None; 6];
        mate[1] = Some(2);
        mate[2] = Some(1);
        mate[4] = Some(5);
        mate[5] = Some(4);
        let p = augmenting_path(&a, &mate, 0).expect("path exists");
        assert_eq!(p.first(), Some(&0));
        assert!(mate[*p.last().unwrap()].is_none());
        assert_eq!(p.len() % 2, 0);
    }

    #[test]
    fn maximum_on_petersen_like_graph() {
        let a = adj(
            10,
            &[
                (0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
                (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
            ],
        );
        let mut mate = vec![None; 10];
        maximum(&a, &mut mate);
        assert!(mate.iter().all(|m| m.is_some()));
    }
}
