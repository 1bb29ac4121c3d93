use elgot_demo::{explore_tree, solve, stream_trace};

const COMB: &str = "sig mul 2\nvar x = mul(a,y)\nvar y = mul(b,x)\nvar z = mul(a,w)\nvar w = mul(b,z)\n\
var a = param a\nvar b = param b\nroot x\n";

#[test]
fn unfolds_and_minimizes() {
    let out: serde_json::Value = serde_json::from_str(&explore_tree(COMB, 3).unwrap()).unwrap();
    assert_eq!(out["unfolded"], "(mul a (mul b (mul a ^)))");
    assert_eq!(out["states"], 4);
    assert_eq!(out["original_states"], 4);
    assert!(out["minimized"].as_str().unwrap().ends_with("root x\n"));
    assert!(explore_tree("var x = param a\n", 1).unwrap_err().contains("root"));
}

#[test]
fn solves_in_a_lattice() {
    let lattice = "carrier bot a b top\nsig mul 2\nbottom bot\njoin a b = top\njoin a top = top\njoin b top = top\n";
    assert_eq!(solve("sig mul 2\nvar x = mul(x,x)\n", lattice).unwrap(), "x = bot\n");
    assert!(solve("sig mul 2\nvar x = mul(x)\n", lattice)
        .unwrap_err()
        .starts_with("system:2:"));
}

#[test]
fn traces_banach_iteration() {
    let alg = "metric epsilon 0.5 tolerance 1e-9\nfn avg4 (x+y)/4\n";
    let out: serde_json::Value = serde_json::from_str(&stream_trace(alg, "", "1, 0", "avg4").unwrap()).unwrap();
    let iterates = out["iterates"].as_array().unwrap();
    let last = iterates.last().unwrap()[0].as_f64().unwrap();
    assert!((last - 4.0 / 15.0).abs() < 1e-9);
    assert!(iterates.len() <= 40);
    assert_eq!(out["vars"][0], "x0");
    assert!(stream_trace("carrier a\nbottom a\n", "", "a", "f").is_err());
}
