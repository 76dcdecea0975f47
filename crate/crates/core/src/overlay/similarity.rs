//! Cosine similarity between category vectors.

/// s_ij = (M_i · M_j) / (‖M_i‖ ‖M_j‖) over matrix rows. Zero rows score 0
/// against everything; the diagonal is 1 for nonzero rows.
pub fn cosine_similarity(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let norms: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut sim = vec![vec![0.0; n]; n];
    for i in 0..n {
        if norms[i] == 0.0 {
            continue;
        }
        sim[i][i] = 1.0;
        for j in (i + 1)..n {
            if norms[j] == 0.0 {
                continue;
            }
            let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            let s = dot / (norms[i] * norms[j]);
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    sim
}
