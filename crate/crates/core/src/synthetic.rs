//! Seeded synthetic corpora in the style of restaurant search and in-car
//! assistant dialogues, for tests and benchmarks. Real datasets
//! are read through [`crate::corpus::ingest`].

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::corpus::{Corpus, Dialogue, Ontology, SlotValue, SourceFormat, Turn};

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

const AREAS: &[&str] = &["centre", "north", "south", "east", "west"];
const FOODS: &[&str] = &[
    "chinese", "thai", "asian oriental", "italian", "spanish", "indian", "british", "modern european",
];
const PRICES: &[&str] = &["cheap", "moderate", "expensive"];
const NAMES: &[&str] = &["la tasca", "dojo noodle bar", "saigon city", "the golden house", "da vinci pizzeria"];

pub fn camrest_ontology() -> Ontology {
    let informable = BTreeMap::from([
        ("area".to_string(), strings(AREAS)),
        ("food".to_string(), strings(FOODS)),
        ("name".to_string(), strings(NAMES)),
        ("pricerange".to_string(), strings(PRICES)),
    ]);
    Ontology {
        informable,
        requestable: strings(&["address", "area", "food", "name", "phone", "postcode", "pricerange"]),
    }
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("non-empty choice list")
}

/// `n` restaurant-search dialogues of two or three turns.
pub fn camrest_like(n: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dialogues = Vec::with_capacity(n);
    for i in 0..n {
        let (area, food, price, name) = (
            pick(&mut rng, AREAS),
            pick(&mut rng, FOODS),
            pick(&mut rng, PRICES),
            pick(&mut rng, NAMES),
        );
        let constraints = vec![
            SlotValue::new("area", area),
            SlotValue::new("food", food),
            SlotValue::new("pricerange", price),
        ];
        let opening = match rng.random_range(0..4) {
            0 => format!("i would like a {price} restaurant in the {area} part of town that serves {food} food"),
            1 => format!("can you tell me if there is a {price} restaurant serving {food} food anywhere in the {area}?"),
            2 => format!("i want to find a {price} place that serves {food} food in the {area} of town."),
            _ => format!("i am looking for a {food} restaurant in the {area} part of town, something {price} please"),
        };
        let mut turns = vec![Turn {
            index: 0,
            user: opening,
            machine: format!("{name} serves {food} food in the {price} price range. would you like their location?"),
            constraints: constraints.clone(),
            requested: vec![],
        }];

        let mut requested: Vec<&str> = ["address", "phone", "postcode"]
            .into_iter()
            .filter(|_| rng.random_bool(0.6))
            .collect();
        if requested.is_empty() {
            requested.push("phone");
        }
        let spoken: Vec<&str> = requested
            .iter()
            .map(|r| if *r == "phone" { "phone number" } else { r })
            .collect();
        let asked = spoken.join(" and ");
        let question = match rng.random_range(0..3) {
            0 => format!("what is the {asked}?"),
            1 => format!("could you give me the {asked} please?"),
            _ => format!("yes, i would like their {asked}."),
        };
        let answer = requested
            .iter()
            .zip(&spoken)
            .map(|(r, s)| format!("their {s} is <{r}>"))
            .collect::<Vec<_>>()
            .join(" and ");
        turns.push(Turn {
            index: 1,
            user: question,
            machine: format!("{answer}."),
            constraints: constraints.clone(),
            requested: requested.iter().map(|r| r.to_string()).collect(),
        });

        if rng.random_bool(0.7) {
            let (user, machine) = *[
                ("thank you goodbye", "have a nice day!"),
                ("that is it. thank you.", "thank you for using the cambridge restaurant system."),
                ("thanks again! bye.", "goodbye."),
            ]
            .choose(&mut rng)
            .expect("non-empty");
            turns.push(Turn {
                index: 2,
                user: user.into(),
                machine: machine.into(),
                constraints,
                requested: vec![],
            });
        }
        dialogues.push(Dialogue {
            id: format!("c{i}"),
            domain: "restaurant".into(),
            turns,
            provenance: None,
        });
    }
    Corpus {
        ontology: camrest_ontology(),
        dialogues,
        source: SourceFormat::Normalized,
    }
}

/// Renders `corpus` in the CamRest676 dataset layout: every turn informs
/// its full constraint set and requests its requested slots.
pub fn to_camrest676(corpus: &Corpus) -> Value {
    let records = corpus
        .dialogues
        .iter()
        .map(|d| {
            let dial = d
                .turns
                .iter()
                .map(|t| {
                    let mut slu: Vec<Value> = t
                        .constraints
                        .iter()
                        .map(|c| json!({"act": "inform", "slots": [[c.slot, c.value]]}))
                        .collect();
                    slu.extend(
                        t.requested
                            .iter()
                            .map(|r| json!({"act": "request", "slots": [["slot", r]]})),
                    );
                    json!({
                        "turn": t.index,
                        "usr": {"transcript": t.user, "slu": slu},
                        "sys": {"sent": t.machine},
                    })
                })
                .collect::<Vec<_>>();
            json!({"dialogue_id": d.id, "dial": dial})
        })
        .collect();
    Value::Array(records)
}

const EVENTS: &[&str] = &["dinner", "meeting", "doctor appointment", "tennis activity", "yoga activity"];
const DATES: &[&str] = &["monday", "wednesday", "the 5th", "tomorrow", "today"];
const LOCATIONS: &[&str] = &["boston", "san francisco", "carson", "new york"];
const WEATHER: &[&str] = &["rain", "snow", "cloudy", "hot"];
const POI_TYPES: &[&str] = &["gas station", "coffee or tea place", "parking garage", "chinese restaurant"];
const POIS: &[&str] = &["valero", "starbucks", "dish parking", "panda express"];

pub fn kvret_ontology() -> Ontology {
    let informable = BTreeMap::from([
        ("date".to_string(), strings(DATES)),
        ("event".to_string(), strings(EVENTS)),
        ("location".to_string(), strings(LOCATIONS)),
        ("poi".to_string(), strings(POIS)),
        ("poi_type".to_string(), strings(POI_TYPES)),
        ("weather_attribute".to_string(), strings(WEATHER)),
    ]);
    Ontology {
        informable,
        requestable: strings(&[
            "address",
            "date",
            "distance",
            "party",
            "time",
            "traffic_info",
            "weather_attribute",
        ]),
    }
}

/// `n` single- or two-turn dialogues spread over the schedule, weather and
/// navigate domains.
pub fn kvret_like(n: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dialogues = Vec::with_capacity(n);
    for i in 0..n {
        let domain = ["schedule", "weather", "navigate"][i % 3];
        let mut turns = Vec::new();
        match domain {
            "schedule" => {
                let (event, date) = (pick(&mut rng, EVENTS), pick(&mut rng, DATES));
                turns.push(Turn {
                    index: 0,
                    user: format!("when is my {event}?"),
                    machine: format!("your {event} is on <date> at <time>."),
                    constraints: vec![SlotValue::new("event", event)],
                    requested: strings(&["date", "time"]),
                });
                turns.push(Turn {
                    index: 1,
                    user: format!("who is attending the {event} on {date}?"),
                    machine: "<party> will be attending.".into(),
                    constraints: vec![SlotValue::new("event", event), SlotValue::new("date", date)],
                    requested: strings(&["party"]),
                });
            }
            "weather" => {
                let (w, loc, date) = (pick(&mut rng, WEATHER), pick(&mut rng, LOCATIONS), pick(&mut rng, DATES));
                turns.push(Turn {
                    index: 0,
                    user: format!("will it be {w} in {loc} {date}?"),
                    machine: format!("it will not be {w} in {loc} {date}, the forecast says <weather_attribute>."),
                    constraints: vec![
                        SlotValue::new("weather_attribute", w),
                        SlotValue::new("location", loc),
                        SlotValue::new("date", date),
                    ],
                    requested: strings(&["weather_attribute"]),
                });
            }
            _ => {
                let (kind, poi) = (pick(&mut rng, POI_TYPES), pick(&mut rng, POIS));
                turns.push(Turn {
                    index: 0,
                    user: format!("where is the nearest {kind}?"),
                    machine: format!("{poi} is <distance> away at <address>."),
                    constraints: vec![SlotValue::new("poi_type", kind)],
                    requested: strings(&["distance", "address"]),
                });
                if rng.random_bool(0.5) {
                    turns.push(Turn {
                        index: 1,
                        user: format!("is there any traffic on the way to {poi}? please give me a quick route"),
                        machine: "there is <traffic_info> on the way.".into(),
                        constraints: vec![SlotValue::new("poi_type", kind), SlotValue::new("poi", poi)],
                        requested: strings(&["traffic_info"]),
                    });
                }
            }
        }
        dialogues.push(Dialogue {
            id: format!("k{i}"),
            domain: domain.into(),
            turns,
            provenance: None,
        });
    }
    Corpus {
        ontology: kvret_ontology(),
        dialogues,
        source: SourceFormat::Normalized,
    }
}
