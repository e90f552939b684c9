use super::instance::Instance;

/// Size of a maximum matching, by augmenting paths from each online vertex.
pub fn maximum_matching(inst: &Instance) -> usize {
    let adj: Vec<Vec<usize>> = inst.arrivals.iter().map(|a| a.edges.iter().map(|e| e.0).collect()).collect();
    let mut owner: Vec<Option<usize>> = vec![None; inst.offline];
    let mut size = 0;
    for v in 0..adj.len() {
        let mut visited = vec![false; inst.offline];
        if augment(v, &adj, &mut owner, &mut visited) {
            size += 1;
        }
    }
    size
}

fn augment(v: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &u in &adj[v] {
        if visited[u] {
            continue;
        }
        visited[u] = true;
        if owner[u].is_none_or(|w| augment(w, adj, owner, visited)) {
            owner[u] = Some(v);
            return true;
        }
    }
    false
}

/// Maximum total weight of a matching. Runs the Hungarian method on the
/// square matrix padded with zero-weight entries.
pub fn maximum_weight_matching(inst: &Instance) -> f64 {
    let n = inst.offline.max(inst.arrivals.len());
    if n == 0 {
        return 0.0;
    }
    let mut weight = vec![vec![0.0f64; n]; n];
    for (u, v, w) in inst.edges() {
        weight[v][u] = w;
    }
    let assignment = hungarian_max(&weight);
    assignment.iter().enumerate().map(|(r, &c)| weight[r][c]).sum()
}

/// Row-to-column assignment maximizing the total of a square matrix.
pub fn hungarian_max(weight: &[Vec<f64>]) -> Vec<usize> {
    let n = weight.len();
    let top = weight.iter().flatten().fold(0.0f64, |m, &w| m.max(w));
    let cost = |r: usize, c: usize| top - weight[r][c];
    // Potentials and matches are 1-based; column 0 is the virtual root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for r in 1..=n {
        row_of[0] = r;
        let mut c0 = 0;
        let mut min = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[c0] = true;
            let r0 = row_of[c0];
            let mut delta = f64::INFINITY;
            let mut c1 = 0;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let reduced = cost(r0 - 1, c - 1) - u[r0] - v[c];
                if reduced < min[c] {
                    min[c] = reduced;
                    way[c] = c0;
                }
                if min[c] < delta {
                    delta = min[c];
                    c1 = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[row_of[c]] += delta;
                    v[c] -= delta;
                } else {
                    min[c] -= delta;
                }
            }
            c0 = c1;
            if row_of[c0] == 0 {
                break;
            }
        }
        while c0 != 0 {
            let c1 = way[c0];
            row_of[c0] = row_of[c1];
            c0 = c1;
        }
    }
    let mut assignment = vec![0; n];
    for c in 1..=n {
        assignment[row_of[c] - 1] = c - 1;
    }
    assignment
}
