//! Synthetic bibliography generator: structured works, rendered in every supported
//! reference format, and planted-label corpora built from them.

use std::collections::HashSet;

use citeverify::classify::{title_similarity, Severity};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GIVEN: &[&str] = &[
    "Alice", "Bruno", "Chen", "Dana", "Elif", "Farid", "Grace", "Hiro", "Ines", "Jonas", "Kavya", "Lena", "Mateo",
    "Nadia", "Omar", "Priya", "Quentin", "Rosa", "Sven", "Tomas", "Uma", "Victor", "Wen", "Yara", "Zoltan",
];

// Pairwise far apart under the name-misspelling tolerance.
pub const FAMILY: &[&str] = &[
    "Abernathy", "Bergstrom", "Castellano", "Dimitrov", "Eriksen", "Fujimoto", "Gallagher", "Hernandez", "Ivanova",
    "Jankowski", "Kowalczyk", "Lindqvist", "Mbeki", "Nakamura", "Okonkwo", "Petrov", "Quiroga", "Rasmussen",
    "Sandoval", "Takahashi", "Underwood", "Villanueva", "Wojcik", "Yamamoto", "Zimmermann", "Müller", "Núñez",
    "Østergaard",
];

pub const WORDS: &[&str] = &[
    "adaptive", "asynchronous", "bandwidth", "benchmark", "bounded", "cache", "checkpoint", "cluster", "coherent",
    "collective", "compiler", "compression", "concurrent", "consensus", "convergence", "coupled", "data", "dense",
    "distributed", "dynamic", "elastic", "energy", "exascale", "fault", "federated", "fine", "graph", "grid",
    "heterogeneous", "hierarchical", "hybrid", "implicit", "incremental", "irregular", "iterative", "kernel",
    "latency", "layout", "learning", "lightweight", "load", "locality", "lossy", "matrix", "memory", "mesh",
    "message", "migration", "model", "multigrid", "network", "nonblocking", "numerical", "offload", "optimal",
    "parallel", "partitioning", "performance", "persistent", "pipeline", "placement", "portable", "precision",
    "prediction", "preconditioner", "profiling", "quantum", "queue", "random", "reduction", "replication",
    "resilient", "runtime", "scalable", "scheduling", "search", "simulation", "solver", "sparse", "spectral",
    "stencil", "storage", "stream", "structured", "task", "tensor", "throughput", "tiling", "topology", "tracing",
    "transfer", "tuning", "unified", "vector", "virtual", "workflow", "workload", "accelerator", "allocation",
    "analysis", "approximate", "architecture", "automatic", "balancing", "batched", "co-design", "communication",
    "decomposition", "deterministic", "efficient", "evaluation", "framework", "hardware", "interconnect", "library",
];

const CONNECTORS: &[&str] = &["for", "of", "with", "on", "in"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Person {
    pub given: String,
    pub family: String,
}

impl Person {
    pub fn initial(&self) -> String {
        self.given.chars().next().map(|c| c.to_string()).unwrap_or_default()
    }
}

/// One real (or fabricated) publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Work {
    pub format: u8,
    pub authors: Vec<Person>,
    pub title: String,
    /// What the format calls its venue: conference, journal, publisher, university...
    pub venue: String,
    pub year: i32,
    pub pages: (u32, u32),
    pub volume: u32,
    pub issue: u32,
    pub doi: String,
    pub arxiv_id: String,
    pub publisher: String,
    pub address: String,
    pub report_number: String,
    pub url: String,
    pub version: String,
    pub editors: Vec<Person>,
}

impl Work {
    pub fn page_range(&self) -> String {
        format!("{}-{}", self.pages.0, self.pages.1)
    }

    /// True for formats whose grammar captures authors.
    pub fn has_authors(&self) -> bool {
        self.format != 11
    }
}

const CONF_VENUES: &[&str] = &[
    "Proc. Int. Conf. Parallel Processing",
    "Proc. IEEE Int. Conf. Cluster Computing",
    "Proc. Int. Symp. High-Performance Parallel and Distributed Computing",
    "Proc. Workshop on Extreme-Scale Programming Tools",
    "Proc. Int. Parallel and Distributed Processing Symp.",
];
const JOURNALS: &[&str] = &[
    "IEEE Trans. Parallel Distrib. Syst.",
    "J. Parallel Distrib. Comput.",
    "Concurrency Comput.: Pract. Exper.",
    "Int. J. High Perform. Comput. Appl.",
];
const ACM_VENUES: &[&str] = &[
    "Proceedings of the International Conference for High Performance Computing, Networking, Storage and Analysis",
    "Proceedings of the ACM Symposium on Principles and Practice of Parallel Programming",
    "Proceedings of the International Conference on Supercomputing",
];
const PUBLISHERS: &[(&str, &str)] =
    &[("MIT Press", "Cambridge, MA"), ("Morgan Kaufmann", "San Francisco, CA"), ("Springer", "Cham"), ("SIAM", "Philadelphia, PA")];
const UNIVERSITIES: &[(&str, &str)] = &[
    ("University of Tennessee", "Knoxville, TN"),
    ("Technical University of Munich", "Munich, Germany"),
    ("University of Illinois at Urbana-Champaign", "Urbana, IL"),
];
const LABS: &[&str] = &["Oak Ridge National Laboratory", "Sandia National Laboratories", "Argonne National Laboratory"];
const VANCOUVER_JOURNALS: &[&str] = &["J Parallel Distrib Comput", "Parallel Comput", "Int J High Perform Comput Appl", "Future Gener Comput Syst"];
const BOOKS: &[&str] = &["Handbook of Parallel Computing", "Advances in Computers", "Programming Models for Parallel Computing"];
const BLOGS: &[&str] = &["Developer Blog", "Community Forum", "Project Wiki"];
const MONTHS: &[&str] = &["Jan.", "Feb.", "Mar.", "Apr.", "May", "Jun.", "Jul.", "Aug.", "Sep.", "Oct.", "Nov.", "Dec."];

pub struct Forge {
    rng: ChaCha8Rng,
    serial: u32,
    used_titles: HashSet<String>,
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

impl Forge {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), serial: 0, used_titles: HashSet::new() }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn person(&mut self) -> Person {
        Person {
            given: GIVEN.choose(&mut self.rng).unwrap().to_string(),
            family: FAMILY.choose(&mut self.rng).unwrap().to_string(),
        }
    }

    /// 1..=max people with distinct family names.
    pub fn people(&mut self, max: usize) -> Vec<Person> {
        let n = self.rng.gen_range(1..=max);
        let mut fams: Vec<&str> = FAMILY.to_vec();
        fams.shuffle(&mut self.rng);
        fams[..n]
            .iter()
            .map(|f| Person { given: GIVEN.choose(&mut self.rng).unwrap().to_string(), family: f.to_string() })
            .collect()
    }

    /// Title-case title of `words` content words, unique within this forge.
    pub fn title(&mut self, words: usize) -> String {
        loop {
            let mut out: Vec<String> = Vec::new();
            let mut pool: Vec<&str> = WORDS.to_vec();
            pool.shuffle(&mut self.rng);
            for (i, w) in pool.iter().take(words).enumerate() {
                if i > 1 && i + 1 < words && self.rng.gen_bool(0.15) {
                    out.push(CONNECTORS.choose(&mut self.rng).unwrap().to_string());
                }
                out.push(capitalize(w));
            }
            let t = out.join(" ");
            if self.used_titles.insert(t.to_lowercase()) {
                return t;
            }
        }
    }

    pub fn work(&mut self, format: u8) -> Work {
        self.serial += 1;
        let serial = self.serial;
        let r = &mut self.rng;
        let year = r.gen_range(1995..=2024);
        let start = r.gen_range(1..900);
        let pages = (start, start + r.gen_range(5..20));
        let (publisher, address) = *PUBLISHERS.choose(r).unwrap();
        let venue = match format {
            1 => CONF_VENUES.choose(r).unwrap().to_string(),
            2 => JOURNALS.choose(r).unwrap().to_string(),
            3 => ACM_VENUES.choose(r).unwrap().to_string(),
            4 => "arXiv preprint".to_string(),
            5 => publisher.to_string(),
            6 => BLOGS.choose(r).unwrap().to_string(),
            7 => UNIVERSITIES.choose(r).unwrap().0.to_string(),
            8 => LABS.choose(r).unwrap().to_string(),
            9 => VANCOUVER_JOURNALS.choose(r).unwrap().to_string(),
            10 => BOOKS.choose(r).unwrap().to_string(),
            11 => format!("IEEE Std {}-{}", r.gen_range(700..2000), year),
            12 => "Software".to_string(),
            _ => panic!("format {format} out of range"),
        };
        let address = match format {
            7 => UNIVERSITIES.iter().find(|u| u.0 == venue).unwrap().1.to_string(),
            _ => address.to_string(),
        };
        let words = self.rng.gen_range(10..=13);
        let title = self.title(words);
        let r = &mut self.rng;
        let yy = year % 100;
        let arxiv_id = format!("{:02}{:02}.{:05}", yy, r.gen_range(1..=12), 10000 + serial);
        let volume = r.gen_range(1..60);
        let issue = r.gen_range(1..13);
        let version = format!("{}.{}.{}", r.gen_range(0..5), r.gen_range(0..20), r.gen_range(0..10));
        let report_number = format!("TR-{}-{:04}", year, serial);
        let authors = if format == 11 { Vec::new() } else { self.people(4) };
        let editors = if format == 10 { self.people(2) } else { Vec::new() };
        Work {
            format,
            authors,
            title,
            venue,
            year,
            pages,
            volume,
            issue,
            doi: format!("10.5555/forge.{serial}"),
            arxiv_id,
            publisher: publisher.to_string(),
            address,
            report_number,
            url: format!("https://tools.example.org/forge-{serial}"),
            version,
            editors,
        }
    }

    pub fn month(&mut self) -> &'static str {
        MONTHS.choose(&mut self.rng).unwrap()
    }
}

fn join_list(parts: Vec<String>) -> String {
    match parts.len() {
        0 => String::new(),
        1 => parts[0].clone(),
        2 => format!("{} and {}", parts[0], parts[1]),
        n => format!("{}, and {}", parts[..n - 1].join(", "), parts[n - 1]),
    }
}

pub fn ieee_authors(ps: &[Person]) -> String {
    join_list(ps.iter().map(|p| format!("{}. {}", p.initial(), p.family)).collect())
}

pub fn full_authors(ps: &[Person]) -> String {
    join_list(ps.iter().map(|p| format!("{} {}", p.given, p.family)).collect())
}

pub fn vancouver_authors(ps: &[Person]) -> String {
    ps.iter().map(|p| format!("{} {}", p.family, p.initial())).collect::<Vec<_>>().join(", ")
}

/// The entry text (without its `[N]` marker) for `w` in its format.
pub fn render(w: &Work) -> String {
    let a = ieee_authors(&w.authors);
    let (p0, p1) = w.pages;
    match w.format {
        1 => format!("{a}, \"{},\" in {}, {}, pp. {p0}–{p1}.", w.title, w.venue, w.year),
        2 => format!(
            "{a}, \"{},\" {}, vol. {}, no. {}, pp. {p0}–{p1}, {}.",
            w.title, w.venue, w.volume, w.issue, w.year
        ),
        3 => format!(
            "{}. {}. {}. In {}. {}, {p0}–{p1}. https://doi.org/{}",
            full_authors(&w.authors),
            w.year,
            w.title,
            w.venue,
            w.publisher,
            w.doi
        ),
        4 => format!("{a}, \"{},\" arXiv preprint arXiv:{}, {}.", w.title, w.arxiv_id, w.year),
        5 => format!("{a}, {}, 2nd ed. {}: {}, {}.", w.title, w.address, w.venue, w.year),
        6 => format!("{a}, \"{},\" {}, {}. [Online]. Available: {}", w.title, w.venue, w.year, w.url),
        7 => format!("{a}, \"{},\" Ph.D. dissertation, {}, {}, {}.", w.title, w.venue, w.address, w.year),
        8 => format!("{a}, \"{},\" {}, Tech. Rep. {}, {}.", w.title, w.venue, w.report_number, w.year),
        9 => format!(
            "{}. {}. {}. {};{}:{p0}-{p1}.",
            vancouver_authors(&w.authors),
            w.title,
            w.venue,
            w.year,
            w.volume
        ),
        10 => format!(
            "{a}, \"{},\" in {}, {}, {}. {}: {}, {}, pp. {p0}–{p1}.",
            w.title,
            w.venue,
            ieee_authors(&w.editors),
            if w.editors.len() > 1 { "Eds" } else { "Ed" },
            w.address,
            w.publisher,
            w.year
        ),
        11 => format!("IEEE, \"{},\" {}, {}.", w.title, w.venue, w.year),
        12 => format!("{a}, \"{},\" Version {}, {}. [Software]. Available: {}", w.title, w.version, w.year, w.url),
        f => panic!("format {f} out of range"),
    }
}

/// The 120-entry round-trip corpus: `per_format` works in each of the 12 formats.
pub fn round_trip_corpus(seed: u64, per_format: usize) -> Vec<Work> {
    let mut f = Forge::new(seed);
    (1..=12u8).flat_map(|fmt| (0..per_format).map(|_| fmt).collect::<Vec<_>>()).map(|fmt| f.work(fmt)).collect()
}

// Formats whose entries carry a venue and year the aggregator can confirm.
pub const PLANTED_FORMATS: &[u8] = &[1, 2, 3, 5, 7, 8, 9, 10];

#[derive(Debug, Clone)]
pub struct PlantedCitation {
    pub index: u32,
    pub label: Severity,
    pub text: String,
    /// The real work behind the citation (none for fabrications).
    pub truth: Option<Work>,
}

#[derive(Debug, Clone)]
pub struct PlantedPaper {
    pub paper_id: String,
    pub text: String,
    pub citations: Vec<PlantedCitation>,
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub papers: Vec<PlantedPaper>,
    /// Everything the simulated aggregator knows about.
    pub registry: Vec<Work>,
}

impl PlantedCorpus {
    pub fn citations(&self) -> impl Iterator<Item = (&PlantedPaper, &PlantedCitation)> {
        self.papers.iter().flat_map(|p| p.citations.iter().map(move |c| (p, c)))
    }
}

/// Removes `n` words at random positions (never the first).
fn drop_words(rng: &mut ChaCha8Rng, title: &str, n: usize) -> String {
    let mut words: Vec<&str> = title.split(' ').collect();
    for _ in 0..n {
        let i = rng.gen_range(1..words.len());
        words.remove(i);
    }
    words.join(" ")
}

/// Swaps two adjacent letters inside one long word.
fn typo(rng: &mut ChaCha8Rng, title: &str) -> String {
    let mut words: Vec<String> = title.split(' ').map(str::to_owned).collect();
    let long: Vec<usize> = (0..words.len()).filter(|&i| words[i].chars().count() >= 6).collect();
    let i = *long.choose(rng).expect("titles contain long words");
    let mut cs: Vec<char> = words[i].chars().collect();
    let j = rng.gen_range(1..cs.len() - 1);
    if cs[j] == cs[j + 1] {
        cs[j] = 'x';
    } else {
        cs.swap(j, j + 1);
    }
    words[i] = cs.into_iter().collect();
    words.join(" ")
}

/// Cited form of a real work's title for a planted label.
pub fn plant_title(rng: &mut ChaCha8Rng, title: &str, label: Severity) -> String {
    match label {
        Severity::Ok => title.to_owned(),
        Severity::MinorError => {
            if rng.gen_bool(0.5) {
                typo(rng, title)
            } else {
                drop_words(rng, title, 1)
            }
        }
        Severity::RephrasedTitle => {
            let dropped = drop_words(rng, title, 2);
            let mut words: Vec<String> = dropped.split(' ').map(str::to_owned).collect();
            let i = rng.gen_range(1..words.len());
            words[i] = capitalize(WORDS.choose(rng).unwrap());
            words.join(" ")
        }
        Severity::Mysterious => unreachable!("fabrications get a fresh title"),
    }
}

pub fn paper_text(paper_id: &str, entries: &[String]) -> String {
    let mut t = format!(
        "{paper_id}: A Study of Synthetic Workloads\n\nAbstract\nWe study workloads. Related work and references are discussed in context.\n\n1 Introduction\nPrior systems [1] motivate this work.\n\nReferences\n"
    );
    for (i, e) in entries.iter().enumerate() {
        t.push_str(&format!("[{}] {}\n", i + 1, e));
    }
    t
}

/// `papers` x `per_paper` citations with labels planted in exact proportion to `mix`
/// (percent of ok, minor, rephrased, mysterious).
pub fn planted_corpus(seed: u64, papers: usize, per_paper: usize, mix: [usize; 4]) -> PlantedCorpus {
    assert_eq!(mix.iter().sum::<usize>(), 100);
    let total = papers * per_paper;
    let mut labels = Vec::with_capacity(total);
    for (sev, pct) in Severity::ALL.into_iter().zip(mix) {
        labels.extend(std::iter::repeat_n(sev, total * pct / 100));
    }
    while labels.len() < total {
        labels.push(Severity::Ok);
    }
    let mut forge = Forge::new(seed);
    labels.shuffle(forge.rng());
    let layout: Vec<Vec<Severity>> = labels.chunks(per_paper).map(<[Severity]>::to_vec).collect();
    build_corpus(forge, &layout)
}

/// One paper per element of `layout`, its citations carrying exactly those labels.
pub fn labelled_corpus(seed: u64, layout: &[Vec<Severity>]) -> PlantedCorpus {
    build_corpus(Forge::new(seed), layout)
}

fn build_corpus(mut forge: Forge, layout: &[Vec<Severity>]) -> PlantedCorpus {
    let mut registry = Vec::new();
    let mut fabricated: Vec<Work> = Vec::new();
    let mut out = Vec::with_capacity(layout.len());
    for (p, labels) in layout.iter().enumerate() {
        let paper_id = format!("paper-{p:03}");
        let mut citations = Vec::with_capacity(labels.len());
        for (i, &label) in labels.iter().enumerate() {
            let fmt = *PLANTED_FORMATS.choose(forge.rng()).unwrap();
            let truth = forge.work(fmt);
            let (text, truth) = if label == Severity::Mysterious {
                let mut fake = truth;
                fake.doi = format!("10.5555/fabricated.{p}.{i}");
                fabricated.push(fake.clone());
                (render(&fake), None)
            } else {
                registry.push(truth.clone());
                let mut cited = truth.clone();
                cited.title = plant_title(forge.rng(), &truth.title, label);
                (render(&cited), Some(truth))
            };
            citations.push(PlantedCitation { index: i as u32 + 1, label, text, truth });
        }
        let entries: Vec<String> = citations.iter().map(|c| c.text.clone()).collect();
        out.push(PlantedPaper { text: paper_text(&paper_id, &entries), paper_id, citations });
    }
    // Uncited works, so searches have something to wade through.
    let total: usize = layout.iter().map(Vec::len).sum();
    for _ in 0..total / 5 {
        let fmt = *PLANTED_FORMATS.choose(forge.rng()).unwrap();
        registry.push(forge.work(fmt));
    }
    for f in &fabricated {
        for w in &registry {
            assert!(title_similarity(&f.title, &w.title) < 0.6, "fabrication collides with a real title");
        }
    }
    PlantedCorpus { papers: out, registry }
}

/// Writes each paper to `dir/<paper_id>.txt`.
pub fn write_papers(corpus: &PlantedCorpus, dir: &std::path::Path) {
    std::fs::create_dir_all(dir).unwrap();
    for p in &corpus.papers {
        std::fs::write(dir.join(format!("{}.txt", p.paper_id)), &p.text).unwrap();
    }
}
