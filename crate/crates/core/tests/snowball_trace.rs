use stagewise::snowball::{run_snowball, OfflineProvider, SnowballConfig};
use stagewise::synth::snowball_trace_tweets;

// Hand trace with sample size 500, top 5, floor 50 from round two:
//
// Round 1 queries the seeds. chinavirus yields ids 0..400 and wuhanvirus
// 400..700. Counts: ccpvirus 400, kungflu 350, covid19 80, boycottchina 30,
// chinaflu 30, batsoup 10. The top five take the 30-30 tie in name order and
// leave batsoup out.
//
// Round 2 queries those five. ccpvirus hits 600 tweets but the sample stops
// at 500 (ids 0..400 and 700..800), so ids 800..850 are never seen. The union
// with kungflu (adds 850..900), covid19 (900..1000), boycottchina and chinaflu
// gives chinaliedpeopledied 100, wuhan 50, stayhome 49, batsoup 10. Only the
// first two reach the floor.
#[test]
fn reproduces_hand_traced_rounds() {
    let tweets = snowball_trace_tweets();
    assert_eq!(tweets.len(), 1000);
    let provider = OfflineProvider::from_tweets(&tweets);
    let cfg = SnowballConfig::new(&["#ChinaVirus", "#WuhanVirus"]);
    let result = run_snowball(&provider, &cfg).unwrap();

    assert_eq!(result.rounds.len(), 2);
    let r1: Vec<(&str, usize)> = result.rounds[0].discovered.iter().map(|(t, c)| (t.as_str(), *c)).collect();
    assert_eq!(
        r1,
        [("ccpvirus", 400), ("kungflu", 350), ("covid19", 80), ("boycottchina", 30), ("chinaflu", 30)]
    );
    let r2: Vec<(&str, usize)> = result.rounds[1].discovered.iter().map(|(t, c)| (t.as_str(), *c)).collect();
    assert_eq!(r2, [("chinaliedpeopledied", 100), ("wuhan", 50)]);
    assert_eq!(result.rounds[1].combined.get("stayhome"), 49);
    assert_eq!(result.rounds[1].combined.get("batsoup"), 10);

    assert_eq!(
        result.hashtags,
        [
            "chinavirus",
            "wuhanvirus",
            "ccpvirus",
            "kungflu",
            "covid19",
            "boycottchina",
            "chinaflu",
            "chinaliedpeopledied",
            "wuhan"
        ]
    );
    for (tag, _) in result.discovered() {
        assert!(!cfg.seeds.contains(tag));
    }
    assert!(result.rounds[1].discovered.iter().all(|(_, c)| *c >= 50));
}

#[test]
fn floor_of_fifty_one_drops_the_boundary_tag() {
    let tweets = snowball_trace_tweets();
    let provider = OfflineProvider::from_tweets(&tweets);
    let cfg = SnowballConfig {
        min_occurrences: 51,
        ..SnowballConfig::new(&["chinavirus", "wuhanvirus"])
    };
    let result = run_snowball(&provider, &cfg).unwrap();
    let r2: Vec<&str> = result.rounds[1].discovered.iter().map(|(t, _)| t.as_str()).collect();
    assert_eq!(r2, ["chinaliedpeopledied"]);
}

#[test]
fn third_round_stops_when_nothing_new_appears() {
    let tweets = snowball_trace_tweets();
    let provider = OfflineProvider::from_tweets(&tweets);
    let cfg = SnowballConfig {
        rounds: 5,
        ..SnowballConfig::new(&["chinavirus", "wuhanvirus"])
    };
    let result = run_snowball(&provider, &cfg).unwrap();
    assert_eq!(result.rounds.len(), 3);
    assert!(result.rounds[2].discovered.is_empty());
    assert_eq!(result.hashtags.len(), 9);
}
