use std::collections::HashSet;

use tgrowth::{run, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tgrowth").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Sphere sizes by a direct BFS over (x, n) with (x, t^n)(y, t^m) = (x + T^n y, t^(n+m)).
fn brute_spheres(k: i64, radius: usize) -> Vec<usize> {
    let d = 2 * k + 1;
    let t = |x: [i64; 2], e: i64| {
        let mut x = x;
        for _ in 0..e.abs() {
            x = if e > 0 { [-x[1], x[0] + d * x[1]] } else { [d * x[0] + x[1], -x[0]] };
        }
        x
    };
    let gens = [([1, 0], 0), ([-1, 0], 0), ([0, 1], 0), ([0, -1], 0), ([0, 0], 1), ([0, 0], -1)];
    let mut seen = HashSet::from([([0i64, 0i64], 0i64)]);
    let mut frontier = vec![([0i64, 0i64], 0i64)];
    let mut sizes = vec![1];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &(x, n) in &frontier {
            for &(y, m) in &gens {
                let ty = t(y, n);
                let g = ([x[0] + ty[0], x[1] + ty[1]], n + m);
                if seen.insert(g) {
                    next.push(g);
                }
            }
        }
        sizes.push(next.len());
        frontier = next;
    }
    sizes
}

#[test]
fn ball_json_matches_golden_and_brute_force() {
    let (code, out, _) = call(&["ball", "--k", "2", "--radius", "6", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, include_str!("golden/ball_k2_r6.json"));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let spheres: Vec<usize> = v["sphere_sizes"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap() as usize).collect();
    assert_eq!(spheres, brute_spheres(2, 6));
}

#[test]
fn ball_csv_and_sequential_agree() {
    let (_, par, _) = call(&["ball", "--k", "3", "--radius", "5", "--format", "csv"]);
    let (_, seq, _) = call(&["ball", "--k", "3", "--radius", "5", "--format", "csv", "--sequential"]);
    assert_eq!(par, seq);
    assert!(par.starts_with("radius,sphere,ball\n0,1,1\n1,6,7\n"));
    let last: Vec<usize> = par.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[1], brute_spheres(3, 5)[5]);
}

#[test]
fn reduce_trace_of_k_plus_two() {
    // k + 2 at level 1 violates Rule 2 and rewrites to X - k + 1 + X^-1.
    let (code, out, _) = call(&["reduce", "--k", "2", "--n", "1", "--poly", "lo=0;4", "--trace"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("R2 [0, 0] lo=0;4 -> lo=-1;1,-1,1 L 5 -> 4"), "{}", lines[0]);
    assert_eq!(lines[1], "lo=-1;1,-1,1");
    // At level 0 the constant k + 2 is already reduced.
    let (_, out, _) = call(&["reduce", "--k", "2", "--n", "0", "--poly", "lo=0;4"]);
    assert_eq!(out, "lo=0;4\n");
}

#[test]
fn classify_succ_and_dist() {
    let (_, out, _) = call(&["classify", "--k", "2", "--n", "0", "--poly", "lo=0;4"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!((v["type"].as_str(), v["class"].as_str()), (Some("boundaryP"), Some("Ut-5")));

    let (_, out, _) = call(&["succ", "--k", "2", "--n", "0", "--poly", "lo=0;4"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["successor"], "lo=0;-1,1");
    assert_eq!(v["step"], "-a");
    assert_eq!(v["predecessor_roundtrip"], true);

    let (code, out, _) = call(&["dist", "--k", "2", "--n", "2", "--poly", "lo=0;-3,0,3", "--radius", "8"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!((v["reduced_length"].as_u64(), v["bfs_distance"].as_u64()), (Some(8), Some(8)));
}

#[test]
fn enumerate_csv_lists_reduced_polynomials() {
    let (code, out, _) = call(&["enumerate", "--k", "2", "--n", "0", "--max-length", "3"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "index,poly,class,type,length,x0,x1");
    assert_eq!(lines[1], "0,lo=0;0,,initial,0,0,0");
    assert!(lines.iter().skip(1).all(|l| l.split(',').nth(4).unwrap().parse::<u64>().unwrap() <= 3));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(call(&["ball", "--radius", "3"]).0, EXIT_USAGE);
    assert_eq!(call(&["ball", "--k", "1", "--radius", "3"]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate", "--k", "2"]).0, EXIT_USAGE);
    assert_eq!(call(&["reduce", "--k", "2", "--poly", "4"]).0, EXIT_USAGE);
    let (code, out, err) = call(&["series", "--k", "2"]);
    assert_eq!((code, out.as_str()), (EXIT_USAGE, ""));
    assert!(err.contains("--unchecked"));
    assert_eq!(call(&["--help"]).0, EXIT_OK);
    assert_ne!(EXIT_MISMATCH, EXIT_USAGE);
}

#[test]
fn series_output_is_certified_and_deterministic() {
    let args = ["series", "--k", "2", "--verify-to", "8", "--mode", "ball"];
    let (code, first, _) = call(&args);
    let (_, second, _) = call(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(first, second);
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["verified_radius"], 8);
    let balls: Vec<u64> = v["coefficients"].as_array().unwrap().iter().take(5).map(|c| c.as_u64().unwrap()).collect();
    assert_eq!(balls, [1, 7, 29, 99, 305]);
}
