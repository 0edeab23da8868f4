use removable_core::plane_sets::*;

fn main() {
    let seg = Segment2::new(
        Point2 { x: -1.0 / 3.0, y: 0.55 },
        Point2 { x: 4.0 / 3.0, y: 0.45 },
    );
    let t0 = std::time::Instant::now();
    let cr = last_graph_crossing(&seg, 24).unwrap();
    println!("point = ({}, {}), residual = {}, width = {}, evals = {}, elapsed = {:?}",
        cr.point.x, cr.point.y, cr.residual_bound, cr.bracket_width, cr.evaluations, t0.elapsed());

    let seg2 = Segment2::new(
        Point2 { x: -1.0 / 3.0, y: 1.0 / 3.0 },
        Point2 { x: 4.0 / 3.0, y: 2.0 / 3.0 },
    );
    let t0 = std::time::Instant::now();
    let cr = last_graph_crossing(&seg2, 24).unwrap();
    println!("paper: point = ({}, {}), residual = {}, evals = {}, elapsed = {:?}",
        cr.point.x, cr.point.y, cr.residual_bound, cr.evaluations, t0.elapsed());
}
