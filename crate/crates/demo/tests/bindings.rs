use serde_json::Value;

fn corpus() -> String {
    let topics = [["travel", "ban", "border", "flight"], ["bat", "soup", "market", "wuhan"]];
    (0..60)
        .map(|i| {
            let t = &topics[i % 2];
            (0..8).map(|j| t[(i * 3 + j * 5) % 4]).collect::<Vec<_>>().join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn clean_reports_both_paths() {
    let v: Value = serde_json::from_str(&stagewise_demo::clean("The virus\nspreads @user #ChinaVirus").unwrap()).unwrap();
    assert_eq!(v["classification"], "the virus spreads user chinavirus");
    assert_eq!(v["topic_tokens"], serde_json::json!(["virus", "spread"]));
}

#[test]
fn tfidf_terms_are_unit_norm_and_sorted() {
    let v: Value = serde_json::from_str(&stagewise_demo::tfidf(&corpus(), "travel ban soup", 1).unwrap()).unwrap();
    let w: Vec<f64> = v["terms"].as_array().unwrap().iter().map(|t| t["weight"].as_f64().unwrap()).collect();
    assert!(!w.is_empty());
    assert!((w.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(w.windows(2).all(|p| p[0] >= p[1]));
}

#[test]
fn topics_split_the_two_themes() {
    let v: Value = serde_json::from_str(&stagewise_demo::topics(&corpus(), 4, 2, 200, 1).unwrap()).unwrap();
    let clusters = v["clusters"].as_array().unwrap();
    assert_eq!(clusters.len(), 2);
    for c in clusters {
        let top: Vec<&str> = c["words"].as_array().unwrap()[..4].iter().map(|w| w[0].as_str().unwrap()).collect();
        let travel = top.iter().filter(|w| ["travel", "ban", "border", "flight"].contains(w)).count();
        assert!(travel == 0 || travel == 4, "{top:?}");
    }
}

#[test]
fn bad_input_is_an_error_not_a_panic() {
    assert!(stagewise_demo::topics("", 3, 2, 10, 0).is_err());
    assert!(stagewise_demo::topics(&corpus(), 2, 3, 10, 0).is_err());
    assert!(stagewise_demo::tfidf("", "x", 1).is_err());
}
