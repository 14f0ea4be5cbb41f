/// Least-squares projection of `values` onto non-decreasing sequences
/// (pool adjacent violators, unit weights).
pub fn pool_adjacent_violators(values: &[f64]) -> Vec<f64> {
    // Each block: (mean, count).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        let mut mean = v;
        let mut count = 1usize;
        while let Some(&(prev_mean, prev_count)) = blocks.last() {
            if prev_mean <= mean {
                break;
            }
            blocks.pop();
            let total = prev_count + count;
            mean = (prev_mean * prev_count as f64 + mean * count as f64) / total as f64;
            count = total;
        }
        blocks.push((mean, count));
    }
    let mut out = Vec::with_capacity(values.len());
    for (mean, count) in blocks {
        out.extend(std::iter::repeat_n(mean, count));
    }
    out
}
