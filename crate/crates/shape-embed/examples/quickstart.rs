//! Minimal end-to-end run: build a graph, embed, score the result.

use ndarray::Array2;
use shape_embed::{
    embed, exact_knn, init_pca, symmetrize_tconorm, trustworthiness, umap_affinities, Dataset,
    OptimizerConfig, ShapeKind, ShapeSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two concentric noisy rings living in the first 2 of 10 dimensions.
    let n = 300;
    let x = Array2::from_shape_fn((n, 10), |(i, j)| {
        let t = i as f64 * 0.7;
        let r = if i % 2 == 0 { 1.0 } else { 3.0 };
        match j {
            0 => r * t.cos(),
            1 => r * t.sin(),
            _ => 0.05 * ((i * 31 + j * 17) % 97) as f64 / 97.0,
        }
    });
    let data = Dataset::new(x, None)?;

    let knn = exact_knn(&data, 15)?;
    let graph = symmetrize_tconorm(&umap_affinities(&knn, 15)?)?;

    let attraction = ShapeSpec::bare(ShapeKind::UmapAttr { a: 1.58, b: 0.89 })?;
    let repulsion = ShapeSpec::bare(ShapeKind::UmapRep { a: 1.58, b: 0.89 })?;
    let config = OptimizerConfig::new(attraction, repulsion);

    let init = init_pca(&data.x, config.dim, 10.0)?;
    let result = embed(&graph, None, &config, &init)?;

    let t = trustworthiness(&data.x, &result.coords, 5, None, 0)?;
    println!("embedded {n} points, trustworthiness(5) = {t:.3}");
    Ok(())
}
