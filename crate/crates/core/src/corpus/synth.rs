//! Calibrated synthetic comment-thread generator.
//!
//! Hostile posts follow one of four temporal archetypes (low/high volume
//! crossed with immediate/delayed onset). Text is drawn from innocuous and
//! hostile vocabularies; a configurable share of hostile words comes from
//! the lexicons, the rest from out-of-lexicon roots and their misspellings.
//! Several weak signals are planted so the forecasting tasks are learnable
//! but not trivial:
//!
//! * post authors have a vulnerability that drives whether their posts
//!   attract hostility, so earlier posts predict later ones;
//! * innocuous comments turn tense as the first hostile comment approaches,
//!   and a short build-up burst precedes it;
//! * the first hostile comment of a high-volume post tends to carry
//!   escalation markers (mention, second person, profanity);
//! * commenters have a hostility propensity, so histories carry signal.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rand_distr::{Beta, Exp, Geometric, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use super::{Comment, Corpus, Post, SECONDS_PER_DAY, SECONDS_PER_HOUR};
use crate::textfeat::{HateCategory, Lexicons};
use crate::util::{rng, Rng};
use crate::{Error, Result};

/// Temporal archetype of a hostile post.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Archetype {
    LowImmediate = 0,
    LowDelayed = 1,
    HighImmediate = 2,
    HighDelayed = 3,
}

impl Archetype {
    pub const ALL: [Archetype; 4] = [
        Archetype::LowImmediate,
        Archetype::LowDelayed,
        Archetype::HighImmediate,
        Archetype::HighDelayed,
    ];

    pub fn is_high_volume(self) -> bool {
        matches!(self, Archetype::HighImmediate | Archetype::HighDelayed)
    }

    pub fn is_delayed(self) -> bool {
        matches!(self, Archetype::LowDelayed | Archetype::HighDelayed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_users: usize,
    /// Users eligible to author posts (the first `n_authors` users).
    pub n_authors: usize,
    pub n_posts: usize,
    pub start_epoch: f64,
    pub span_days: f64,

    /// Beta parameters of author vulnerability (probability a post is hostile).
    pub vulnerability_alpha: f64,
    pub vulnerability_beta: f64,
    /// Beta parameters of commenter hostility propensity.
    pub hostility_alpha: f64,
    pub hostility_beta: f64,

    /// Probabilities of the four archetypes, in [`Archetype`] order.
    pub cluster_mix: [f64; 4],
    pub low_volume_mean: f64,
    pub high_volume_mean: f64,
    pub immediate_onset_mean_hours: f64,
    pub immediate_onset_max_hours: f64,
    pub delayed_onset_min_hours: f64,
    pub delayed_onset_mean_hours: f64,
    pub delayed_onset_max_hours: f64,
    pub low_burst_hours: f64,
    pub high_burst_hours: f64,

    /// Target share of hostile comments; innocuous volume is calibrated to it.
    pub target_hostile_fraction: f64,
    pub innocuous_sigma: f64,
    pub max_comments: usize,
    /// Innocuous comment timing: shares of the fast and medium exponential
    /// components, the remainder is a slow log-normal tail.
    pub fast_share: f64,
    pub fast_mean_hours: f64,
    pub mid_share: f64,
    pub mid_mean_hours: f64,
    pub slow_median_days: f64,
    pub slow_sigma: f64,

    pub buildup_mean: f64,
    pub buildup_hours: f64,
    pub tension_base: f64,
    pub tension_peak: f64,
    pub tension_decay_hours: f64,

    pub mention_rate: f64,
    pub emoji_rate: f64,
    pub banter_rate: f64,
    /// Probability that a hostile word is drawn from the lexicons.
    pub lexicon_rate: f64,
    /// Share of hostile comments without any hostile word.
    pub subtle_rate: f64,
    pub escalation_marker_rate: f64,
    /// Pseudo-words appended to the innocuous vocabulary tail.
    pub extra_innocuous_words: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            n_users: 1500,
            n_authors: 400,
            n_posts: 1134,
            start_epoch: 1_500_000_000.0,
            span_days: 120.0,
            vulnerability_alpha: 0.6,
            vulnerability_beta: 0.55,
            hostility_alpha: 0.5,
            hostility_beta: 4.0,
            cluster_mix: [0.25, 0.2, 0.3, 0.25],
            low_volume_mean: 3.0,
            high_volume_mean: 11.0,
            immediate_onset_mean_hours: 0.5,
            immediate_onset_max_hours: 2.0,
            delayed_onset_min_hours: 6.0,
            delayed_onset_mean_hours: 13.0,
            delayed_onset_max_hours: 96.0,
            low_burst_hours: 1.5,
            high_burst_hours: 8.0,
            target_hostile_fraction: 0.13,
            innocuous_sigma: 1.0,
            max_comments: 800,
            fast_share: 0.55,
            fast_mean_hours: 2.0,
            mid_share: 0.30,
            mid_mean_hours: 30.0,
            slow_median_days: 4.0,
            slow_sigma: 1.0,
            buildup_mean: 2.0,
            buildup_hours: 1.5,
            tension_base: 0.04,
            tension_peak: 0.45,
            tension_decay_hours: 3.0,
            mention_rate: 0.12,
            emoji_rate: 0.35,
            banter_rate: 0.02,
            lexicon_rate: 0.15,
            subtle_rate: 0.2,
            escalation_marker_rate: 0.7,
            extra_innocuous_words: 300,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_users == 0 || self.n_posts == 0 || self.n_authors == 0 {
            return bad("n_users, n_authors and n_posts must be positive");
        }
        if self.n_authors > self.n_users {
            return bad("n_authors exceeds n_users");
        }
        let probs = [
            ("target_hostile_fraction", self.target_hostile_fraction),
            ("fast_share", self.fast_share),
            ("mid_share", self.mid_share),
            ("tension_base", self.tension_base),
            ("tension_peak", self.tension_peak),
            ("mention_rate", self.mention_rate),
            ("emoji_rate", self.emoji_rate),
            ("banter_rate", self.banter_rate),
            ("lexicon_rate", self.lexicon_rate),
            ("subtle_rate", self.subtle_rate),
            ("escalation_marker_rate", self.escalation_marker_rate),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} is not a probability")));
            }
        }
        if self.fast_share + self.mid_share > 1.0 {
            return bad("fast_share + mid_share exceeds 1");
        }
        if self.tension_base + self.tension_peak > 1.0 {
            return bad("tension_base + tension_peak exceeds 1");
        }
        if self.target_hostile_fraction <= 0.0 || self.target_hostile_fraction >= 1.0 {
            return bad("target_hostile_fraction must be in (0, 1)");
        }
        if self.cluster_mix.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("cluster_mix entries must be probabilities");
        }
        if (self.cluster_mix.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("cluster_mix must sum to 1");
        }
        let positive = [
            self.vulnerability_alpha,
            self.vulnerability_beta,
            self.hostility_alpha,
            self.hostility_beta,
            self.immediate_onset_mean_hours,
            self.immediate_onset_max_hours,
            self.delayed_onset_mean_hours,
            self.low_burst_hours,
            self.high_burst_hours,
            self.innocuous_sigma,
            self.fast_mean_hours,
            self.mid_mean_hours,
            self.slow_median_days,
            self.slow_sigma,
            self.buildup_hours,
            self.tension_decay_hours,
            self.span_days,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("rate, scale and shape parameters must be positive");
        }
        if self.low_volume_mean < 1.0 || self.high_volume_mean < 1.0 {
            return bad("volume means must be at least 1");
        }
        if self.delayed_onset_min_hours < 0.0
            || self.delayed_onset_max_hours <= self.delayed_onset_min_hours
        {
            return bad("delayed onset window is empty");
        }
        if self.buildup_mean < 0.0 || self.max_comments == 0 {
            return bad("buildup_mean must be non-negative and max_comments positive");
        }
        Ok(())
    }
}

/// Generated corpus plus the planted ground truth per post.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    /// Archetype of each hostile post (`None` for non-hostile posts), by post index.
    pub archetypes: Vec<Option<Archetype>>,
    /// Onset of the first hostile comment in seconds, by post index.
    pub onsets: Vec<Option<f64>>,
}

const INNOCUOUS: &[&str] = &[
    "love", "this", "so", "cute", "omg", "beautiful", "happy", "bday", "birthday", "lol",
    "the", "best", "girl", "pic", "nice", "wow", "yes", "my", "friend", "miss", "gorgeous",
    "pretty", "amazing", "awesome", "goals", "queen", "fam", "babe", "hey", "congrats", "and",
    "is", "a", "to", "in", "it", "that", "for", "with", "on", "all", "just", "like", "too",
    "cool", "good", "great", "fun", "party", "tonight", "game", "team", "school", "class",
    "summer", "beach", "dog", "cat", "puppy", "food", "pizza", "yummy", "hair", "outfit",
    "dress", "shoes", "look", "looking", "fire", "lit", "vibes", "mood", "same", "tbh", "ily",
    "bestie", "bro", "dude", "sis", "girls", "boys", "weekend", "trip", "fav", "favorite",
    "smile", "eyes", "face", "selfie", "photo", "shot", "view", "sunset", "night", "day",
    "morning", "coffee", "song", "music", "dance", "concert", "show", "movie", "finally",
    "proud", "win", "won", "champs", "soccer", "football", "basketball", "practice", "home",
    "family", "mom", "dad", "baby", "sweet", "adorable", "stunning", "perfect", "thanks",
    "thank", "welcome", "hbd", "hope", "have", "great", "wish", "luck", "soon", "see", "come",
    "back", "when", "where", "here", "there", "what", "how", "we", "us", "our",
];

const TENSION: &[&str] = &[
    "wrong", "whatever", "seriously", "weird", "drama", "fake", "boring", "annoying", "really",
    "stop", "lies", "rude", "why", "tho", "smh", "nah",
];

const HOSTILE_ROOTS: &[&str] = &[
    "suck", "trash", "clown", "pathetic", "disgusting", "loser", "nobody", "worthless", "fatty",
    "dumb", "stupid", "hate", "cringe", "lame", "freak", "garbage", "creep", "liar", "snake",
    "fraud", "joke", "ugly", "gross", "kys", "die",
];

const PRONOUNS_2P: &[&str] = &["you", "ur", "u", "youre"];
const PRONOUNS_3P: &[&str] = &["she", "he", "her", "him"];
const EMOJI_NICE: &[&str] = &["😂", "😍", "🔥", "💯", "🙌", "🎂", "😘", "👏", "💕", "🥰", "✨", "🎉"];
const EMOJI_HOSTILE: &[&str] = &["🤡", "🖕", "😡", "💀", "🙄", "🤮"];

struct Vocab {
    innocuous: Vec<String>,
    innocuous_w: WeightedIndex<f64>,
    hostile: Vec<String>,
    hostile_w: WeightedIndex<f64>,
    lexicon: Vec<String>,
    profane: Vec<String>,
}

fn pseudo_word(i: usize) -> String {
    const ON: &[&str] = &["b", "k", "m", "l", "t", "s", "d", "r", "n", "p", "v", "z"];
    const NU: &[&str] = &["a", "e", "i", "o", "u", "ay", "ee", "oo"];
    let mut w = String::new();
    let mut x = i + 7;
    for _ in 0..3 {
        w.push_str(ON[x % ON.len()]);
        x /= ON.len();
        w.push_str(NU[x % NU.len()]);
        x /= NU.len();
        if x == 0 {
            break;
        }
    }
    w
}

impl Vocab {
    fn new(cfg: &SynthConfig) -> Self {
        let mut innocuous: Vec<String> = INNOCUOUS.iter().map(|s| s.to_string()).collect();
        innocuous.dedup();
        innocuous.extend((0..cfg.extra_innocuous_words).map(|i| format!("{}x", pseudo_word(i))));
        let innocuous_w =
            WeightedIndex::new((0..innocuous.len()).map(|i| 1.0 / (i as f64 + 2.0))).unwrap();
        // each root with its plural, a doubled final letter and a trailing "z"
        let mut hostile = Vec::new();
        let mut weights = Vec::new();
        for (r, root) in HOSTILE_ROOTS.iter().enumerate() {
            let base = 1.0 / (r as f64 + 3.0);
            let last = root.chars().last().unwrap();
            let variants = [
                (root.to_string(), 0.6),
                (format!("{root}s"), 0.15),
                (format!("{root}{last}"), 0.15),
                (format!("{root}z"), 0.1),
            ];
            for (v, w) in variants {
                hostile.push(v);
                weights.push(base * w);
            }
        }
        let hostile_w = WeightedIndex::new(weights).unwrap();
        let lex = Lexicons::builtin();
        let mut lexicon: Vec<String> = HateCategory::ALL
            .iter()
            .flat_map(|&c| lex.hate_words(c).iter().cloned())
            .collect();
        lexicon.extend(lex.profane_words().iter().cloned());
        let profane = lex.profane_words().iter().cloned().collect();
        Vocab { innocuous, innocuous_w, hostile, hostile_w, lexicon, profane }
    }
}

fn pick<'a>(r: &mut Rng, xs: &'a [&'a str]) -> &'a str {
    xs[r.random_range(0..xs.len())]
}

/// Renders a token list as comment text; tokens that look like mentions are
/// replaced with concrete user handles.
fn render(r: &mut Rng, tokens: Vec<String>, n_users: usize) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.into_iter().enumerate() {
        let is_emoji = !tok.chars().next().is_some_and(char::is_alphanumeric) && tok != "@";
        if i > 0 && !(is_emoji && r.random_bool(0.5)) {
            out.push(' ');
        }
        if tok == "@" {
            out.push_str(&format!("@{}", user_id(r.random_range(0..n_users))));
        } else if i == 0 && r.random_bool(0.3) {
            let mut cs = tok.chars();
            let first = cs.next().unwrap();
            out.extend(first.to_uppercase());
            out.push_str(cs.as_str());
        } else {
            out.push_str(&tok);
        }
    }
    if r.random_bool(0.2) {
        out.push_str("!!");
    }
    out
}

fn user_id(i: usize) -> String {
    format!("u{i:05}")
}

struct Users {
    vulnerability: Vec<f64>,
    author_pick: WeightedIndex<f64>,
    innocuous_pick: WeightedIndex<f64>,
    hostile_pick: WeightedIndex<f64>,
}

impl Users {
    fn new(cfg: &SynthConfig, r: &mut Rng) -> Self {
        let vuln = Beta::new(cfg.vulnerability_alpha, cfg.vulnerability_beta).unwrap();
        let host = Beta::new(cfg.hostility_alpha, cfg.hostility_beta).unwrap();
        let activity = LogNormal::new(0.0, 1.0).unwrap();
        let author_act = LogNormal::new(0.0, 0.5).unwrap();
        let mut vulnerability = Vec::with_capacity(cfg.n_users);
        let mut inn = Vec::with_capacity(cfg.n_users);
        let mut hos = Vec::with_capacity(cfg.n_users);
        let mut auth = Vec::with_capacity(cfg.n_authors);
        for i in 0..cfg.n_users {
            vulnerability.push(vuln.sample(r));
            let h: f64 = host.sample(r);
            let a: f64 = activity.sample(r);
            inn.push(a * (1.0 - h));
            hos.push(a * h + 1e-12);
            if i < cfg.n_authors {
                auth.push(author_act.sample(r));
            }
        }
        Users {
            vulnerability,
            author_pick: WeightedIndex::new(auth).unwrap(),
            innocuous_pick: WeightedIndex::new(inn).unwrap(),
            hostile_pick: WeightedIndex::new(hos).unwrap(),
        }
    }
}

/// Draws from `dist` until the value lands in `[lo, hi]`.
fn truncated<D: Distribution<f64>>(r: &mut Rng, dist: &D, lo: f64, hi: f64) -> f64 {
    for _ in 0..10_000 {
        let v = dist.sample(r);
        if (lo..=hi).contains(&v) {
            return v;
        }
    }
    lo
}

struct PostPlan {
    author: usize,
    created_at: f64,
    archetype: Option<Archetype>,
    onset: f64,
    hostile_times: Vec<f64>,
    buildup_times: Vec<f64>,
}

/// Generates a corpus; a pure function of the configuration (seed included).
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut r_users = rng(cfg.seed, 1);
    let mut r_plan = rng(cfg.seed, 2);
    let mut r_text = rng(cfg.seed, 3);
    let users = Users::new(cfg, &mut r_users);
    let vocab = Vocab::new(cfg);

    let mix = WeightedIndex::new(cfg.cluster_mix.iter().map(|p| p + 1e-300)).unwrap();
    let imm = Exp::new(1.0 / cfg.immediate_onset_mean_hours).unwrap();
    let del = Exp::new(1.0 / cfg.delayed_onset_mean_hours).unwrap();
    let low_n = Geometric::new(1.0 / cfg.low_volume_mean).unwrap();
    let high_n = Geometric::new(1.0 / cfg.high_volume_mean).unwrap();
    let low_burst = Exp::new(1.0 / cfg.low_burst_hours).unwrap();
    let high_burst = Exp::new(1.0 / cfg.high_burst_hours).unwrap();
    let buildup_n = Poisson::new(cfg.buildup_mean.max(1e-9)).unwrap();
    let buildup_gap = Exp::new(1.0 / cfg.buildup_hours).unwrap();
    let max_t = 30.0 * SECONDS_PER_DAY;

    // plan hostility first so the innocuous volume can be calibrated
    let mut plans = Vec::with_capacity(cfg.n_posts);
    for _ in 0..cfg.n_posts {
        let author = users.author_pick.sample(&mut r_plan);
        let created_at = cfg.start_epoch + r_plan.random::<f64>() * cfg.span_days * SECONDS_PER_DAY;
        let hostile = r_plan.random_bool(users.vulnerability[author]);
        let mut plan = PostPlan {
            author,
            created_at,
            archetype: None,
            onset: 0.0,
            hostile_times: Vec::new(),
            buildup_times: Vec::new(),
        };
        if hostile {
            let a = Archetype::ALL[mix.sample(&mut r_plan)];
            let onset_h = if a.is_delayed() {
                cfg.delayed_onset_min_hours
                    + truncated(
                        &mut r_plan,
                        &del,
                        0.0,
                        cfg.delayed_onset_max_hours - cfg.delayed_onset_min_hours,
                    )
            } else {
                truncated(&mut r_plan, &imm, 0.0, cfg.immediate_onset_max_hours)
            };
            let onset = onset_h * SECONDS_PER_HOUR;
            let (n, burst) = if a.is_high_volume() {
                (1 + high_n.sample(&mut r_plan) as usize, &high_burst)
            } else {
                (1 + low_n.sample(&mut r_plan) as usize, &low_burst)
            };
            let n = n.min(cfg.max_comments);
            let mut times = vec![onset];
            for _ in 1..n {
                let dt: f64 = burst.sample(&mut r_plan);
                times.push((onset + dt * SECONDS_PER_HOUR).min(max_t));
            }
            let nb = buildup_n.sample(&mut r_plan) as usize;
            for _ in 0..nb {
                let gap: f64 = buildup_gap.sample(&mut r_plan);
                let t = onset - gap * SECONDS_PER_HOUR;
                if t >= 0.0 {
                    plan.buildup_times.push(t);
                }
            }
            plan.archetype = Some(a);
            plan.onset = onset;
            plan.hostile_times = times;
        }
        plans.push(plan);
    }

    let total_hostile: usize = plans.iter().map(|p| p.hostile_times.len()).sum();
    let total_buildup: usize = plans.iter().map(|p| p.buildup_times.len()).sum();
    let f = cfg.target_hostile_fraction;
    let innocuous_target = total_hostile as f64 * (1.0 - f) / f - total_buildup as f64;
    let mean_innocuous = (innocuous_target / cfg.n_posts as f64).max(1.0);
    let sigma = cfg.innocuous_sigma;
    let count_dist = LogNormal::new(mean_innocuous.ln() - sigma * sigma / 2.0, sigma).unwrap();
    let fast = Exp::new(1.0 / cfg.fast_mean_hours).unwrap();
    let mid = Exp::new(1.0 / cfg.mid_mean_hours).unwrap();
    let slow = LogNormal::new(cfg.slow_median_days.ln(), cfg.slow_sigma).unwrap();

    let mut posts = Vec::with_capacity(cfg.n_posts);
    let mut archetypes = Vec::with_capacity(cfg.n_posts);
    let mut onsets = Vec::with_capacity(cfg.n_posts);
    for (pi, plan) in plans.iter().enumerate() {
        let n_inn = (count_dist.sample(&mut r_plan) as f64)
            .round()
            .clamp(1.0, cfg.max_comments as f64) as usize;
        // (time, kind): 0 innocuous, 1 build-up, 2 first hostile, 3 later hostile
        let mut events: Vec<(f64, u8)> = Vec::with_capacity(n_inn + plan.hostile_times.len());
        for _ in 0..n_inn {
            let u: f64 = r_plan.random();
            let t = if u < cfg.fast_share {
                fast.sample(&mut r_plan) * SECONDS_PER_HOUR
            } else if u < cfg.fast_share + cfg.mid_share {
                mid.sample(&mut r_plan) * SECONDS_PER_HOUR
            } else {
                slow.sample(&mut r_plan) * SECONDS_PER_DAY
            };
            events.push((t.min(365.0 * SECONDS_PER_DAY), 0));
        }
        events.extend(plan.buildup_times.iter().map(|&t| (t, 1)));
        for (i, &t) in plan.hostile_times.iter().enumerate() {
            events.push((t, if i == 0 { 2 } else { 3 }));
        }
        // on equal times the first hostile comment stays ahead of everything
        let rank = |k: u8| [2u8, 3, 0, 1][k as usize];
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(rank(a.1).cmp(&rank(b.1))));

        let post_id = format!("p{pi:05}");
        let mut comments = Vec::with_capacity(events.len());
        for (j, &(t, kind)) in events.iter().enumerate() {
            let (tokens, hostile, author) = match kind {
                2 | 3 => {
                    let escalate = kind == 2 && plan.archetype.is_some_and(Archetype::is_high_volume);
                    let toks = hostile_tokens(cfg, &vocab, &mut r_text, escalate);
                    (toks, true, users.hostile_pick.sample(&mut r_text))
                }
                _ => {
                    let tension = match plan.archetype {
                        Some(_) if kind == 1 => cfg.tension_base + cfg.tension_peak,
                        Some(_) => {
                            let gap_h = (plan.onset - t) / SECONDS_PER_HOUR;
                            if gap_h >= 0.0 {
                                cfg.tension_base
                                    + cfg.tension_peak * (-gap_h / cfg.tension_decay_hours).exp()
                            } else {
                                cfg.tension_base + 0.5 * cfg.tension_peak
                            }
                        }
                        None => cfg.tension_base,
                    };
                    let toks = innocuous_tokens(cfg, &vocab, &mut r_text, tension);
                    (toks, false, users.innocuous_pick.sample(&mut r_text))
                }
            };
            let text = render(&mut r_text, tokens, cfg.n_users);
            comments.push(Comment {
                id: format!("{post_id}c{j:04}"),
                author: user_id(author),
                text,
                t,
                hostile,
            });
        }
        posts.push(Post {
            id: post_id,
            author: user_id(plan.author),
            created_at: plan.created_at,
            comments,
        });
        archetypes.push(plan.archetype);
        onsets.push(plan.archetype.map(|_| plan.onset));
    }
    Ok(SynthCorpus { corpus: Corpus::new(posts)?, archetypes, onsets })
}

fn innocuous_tokens(cfg: &SynthConfig, v: &Vocab, r: &mut Rng, tension: f64) -> Vec<String> {
    let len = r.random_range(2..=9);
    let mut toks: Vec<String> =
        (0..len).map(|_| v.innocuous[v.innocuous_w.sample(r)].clone()).collect();
    if r.random_bool(tension) {
        let pos = r.random_range(0..=toks.len());
        toks.insert(pos, pick(r, TENSION).to_string());
        if r.random_bool(0.5) {
            toks.push(pick(r, TENSION).to_string());
        }
    }
    if r.random_bool(cfg.banter_rate) {
        let w = if r.random_bool(0.3) {
            v.profane[r.random_range(0..v.profane.len())].clone()
        } else {
            v.hostile[v.hostile_w.sample(r)].clone()
        };
        toks.push(w);
    }
    if r.random_bool(cfg.mention_rate) {
        toks.insert(0, "@".into());
    }
    if r.random_bool(cfg.emoji_rate) {
        for _ in 0..r.random_range(1..=3) {
            toks.push(pick(r, EMOJI_NICE).to_string());
        }
    }
    toks
}

fn hostile_tokens(cfg: &SynthConfig, v: &Vocab, r: &mut Rng, escalate: bool) -> Vec<String> {
    let mut toks: Vec<String> = (0..r.random_range(1..=4))
        .map(|_| v.innocuous[v.innocuous_w.sample(r)].clone())
        .collect();
    if !r.random_bool(cfg.subtle_rate) {
        for _ in 0..r.random_range(1..=2) {
            let w = if r.random_bool(cfg.lexicon_rate) {
                v.lexicon[r.random_range(0..v.lexicon.len())].clone()
            } else {
                v.hostile[v.hostile_w.sample(r)].clone()
            };
            let pos = r.random_range(0..=toks.len());
            toks.insert(pos, w);
        }
    }
    let marked = escalate && r.random_bool(cfg.escalation_marker_rate);
    if marked || r.random_bool(0.5) {
        toks.insert(0, pick(r, PRONOUNS_2P).to_string());
    } else if r.random_bool(0.3) {
        toks.insert(0, pick(r, PRONOUNS_3P).to_string());
    }
    if marked || r.random_bool(0.3) {
        toks.insert(0, "@".into());
    }
    if marked && r.random_bool(0.6) {
        toks.insert(1, v.profane[r.random_range(0..v.profane.len())].clone());
    }
    if r.random_bool(0.25) {
        toks.push(pick(r, EMOJI_HOSTILE).to_string());
    }
    toks
}
