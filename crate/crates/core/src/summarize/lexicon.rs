//! Small embedded English verb lexicon with suffix heuristics, plus the
//! closed-class word lists used by extraction and compression.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use crate::domain::Token;

// Base forms. Words that are overwhelmingly nouns in headlines ("share",
// "stock", "rate", "price", "talk", "trade", "record") are left out.
const BASE_VERBS: &str = "
abandon absorb accelerate accept access accommodate accomplish accumulate accuse achieve acknowledge
acquire act adapt add address adjust admit adopt advance advise advocate affect affirm afford agree
aid aim alert allege allocate allow alter amend amount analyse analyze announce answer anticipate
apologise apologize appeal appear applaud apply appoint appreciate approach approve argue arise
arrange arrest arrive ask assemble assert assess assign assist assume assure attach attack attain
attempt attend attract audit authorise authorize avert avoid await award ban bargain battle be bear
beat become beg begin behave believe belong benefit bet betray bid bind blame blast blend bless
block blow boast boost borrow bounce break breed brief bring broaden build burn burst buy calculate
call calm campaign cancel capture care carry cast catch cause caution cease celebrate challenge
change charge chase cheat check cheer choose cite claim clarify clash classify clean clear climb
cling close collaborate collapse collect combat combine come comfort command comment commit
communicate compare compel compensate compete compile complain complete comply compose comprise
compromise conceal concede conceive concentrate conclude condemn conduct confess confirm confiscate
confront confuse congratulate connect consider consist consolidate construct consult consume contact
contain contemplate contend contest continue contract contrast contribute control convene convert
convey convict convince cooperate coordinate cope correct cost counter cover crack crash create
credit criticise criticize cross crush cry cultivate curb cure dare debate decide declare decline
decrease deem defeat defend defer define delay delegate delete deliver demand demolish demonstrate
deny depart depend deploy deposit depress derive describe deserve design desire destroy detail
detain detect deter determine devastate develop devote die differ dig diminish direct disagree
disappear disappoint disclose discourage discover discuss dismiss dispatch dispute disrupt dissolve
distribute divert divest divide do dominate donate double doubt downgrade draft drag draw dream
drift drink drive drop drown dump earn ease eat echo edge elect eliminate embark embrace emerge
emphasise emphasize employ enable enact encounter encourage end endorse endure enforce engage
enhance enjoy enlarge enrich ensure enter entertain entitle equip erase erode escalate escape
establish estimate evacuate evade evaluate evolve examine exceed exchange exclude excuse execute
exercise exhibit exist exit expand expect expel experience experiment explain explode exploit
explore export expose express extend extract face facilitate fail fall falter favor favour fear feed
feel fetch fight file fill finalise finalize finance find finish fire fit fix flag flee float flood
flourish flow fly focus fold follow forbid force forecast forge forget forgive form formulate foster
found freeze fuel fulfil fulfill function gain garner gather generate get give go govern grab grant
grapple greet grip grow guarantee guide hail halt halve handle hang happen harm harvest hate have
head heal hear heat hedge help hesitate hide hike hint hire hit hold honor honour hope host hurt
identify ignite ignore illustrate imagine impact implement imply import impose impress imprison
improve include incorporate increase incur indicate indict induce infect inflate influence inform
inherit inhibit initiate inject injure innovate inquire insist inspect inspire install instruct
insure integrate intend intensify intervene interview introduce invade invent invest investigate
invite involve isolate issue join judge jump justify keep kick kill knock know label lack land
launch lay lead leak lean learn lease leave lend lessen let leverage license lie lift like limit
link liquidate listen live load loan lobby locate lock lodge look loom lose love lower maintain make
manage mandate manipulate manufacture march mark marry match maximise maximize mean measure meet
merge migrate mind minimise minimize miss mitigate mobilise mobilize modernise modernize modify
monitor mount mourn move multiply name narrow need neglect negotiate nominate note notify nurture
obey object oblige observe obtain occupy occur offer offset omit open operate oppose opt order
organise organize oust outline outpace outperform overcome overhaul overlook override oversee
overtake overturn overwhelm owe own pack participate pass pause pay penalise penalize perform permit
persuade pick pile pilot pioneer place plan plant play plead please pledge plot plummet plunge point
poll ponder pose possess post postpone pour praise pray predict prefer prepare preserve press
pressure presume prevail prevent print prioritise prioritize probe proceed proclaim produce profess
progress prohibit prolong promise promote prompt pronounce propel propose prosecute protect protest
prove provide provoke publish pull pump punish purchase pursue push put qualify question quit quote
race raid raise rally rank ratify reach react read realise realize reassure rebound rebuild recall
receive reckon recognise recognize recommend reconsider recover recruit reduce refer refinance
reflect reform refrain refuse regain regard register regret regulate reinforce reject rejoice relate
relax release relieve rely remain remark remember remind remove rename render renew renounce reopen
reorganise reorganize repair repay repeal repeat replace reply represent reprimand request require
rescue research resemble reserve reshape reshuffle reside resign resist resolve respond rest restore
restrict restructure result resume retain retaliate retire retreat retrieve return reveal revise
revive revoke reward ride rise risk rival roar roll rotate rule run rush sack sacrifice sail
sanction satisfy save say scale scan scare schedule score scramble scrap screen search secure see
seek seem seize select sell send sense separate serve settle shake shape shatter shed shift shine
shock shoot shop shorten shout show shrink shun shut sign signal simplify sing sink sit skip slam
slash sleep slide slip slow slump smash snap soar solve sort sound spark speak speed spend spin
split sponsor spread spur stabilise stabilize stage stall stand start starve stay steal steer step
stick stimulate stir stop strengthen stress stretch strike strip strive struggle study stumble
submit succeed sue suffer suggest suit summon supply support suppose suppress surge surpass surprise
surrender surround survey survive suspect suspend sustain swap sway swear sweep swing switch tackle
take target teach tear tell tempt tend terminate test testify thank think threaten thrive throw
tighten tip tolerate topple touch tour track train transfer transform translate transport travel
treat trigger trim triple triumph try tumble turn tweak uncover undergo undermine understand
undertake unify unite unlock unveil update upgrade uphold urge use utilise utilize vacate validate
vanish vary veto vie visit voice volunteer vote vow wait wake walk want warn wash waste watch weaken
wear weigh welcome widen win wipe wish withdraw withhold witness wonder work worry worsen write
yield
";

// Irregular inflections mapped to their base form.
const IRREGULAR: &[(&str, &str)] = &[
    ("am", "be"),
    ("is", "be"),
    ("are", "be"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("being", "be"),
    ("has", "have"),
    ("had", "have"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("arose", "arise"),
    ("arisen", "arise"),
    ("beat", "beat"),
    ("beaten", "beat"),
    ("became", "become"),
    ("began", "begin"),
    ("begun", "begin"),
    ("bet", "bet"),
    ("bit", "bite"),
    ("bled", "bleed"),
    ("blew", "blow"),
    ("blown", "blow"),
    ("bore", "bear"),
    ("borne", "bear"),
    ("bought", "buy"),
    ("bound", "bind"),
    ("broke", "break"),
    ("broken", "break"),
    ("brought", "bring"),
    ("built", "build"),
    ("burnt", "burn"),
    ("caught", "catch"),
    ("chose", "choose"),
    ("chosen", "choose"),
    ("clung", "cling"),
    ("came", "come"),
    ("cost", "cost"),
    ("dealt", "deal"),
    ("drew", "draw"),
    ("drawn", "draw"),
    ("drank", "drink"),
    ("drove", "drive"),
    ("driven", "drive"),
    ("ate", "eat"),
    ("eaten", "eat"),
    ("fell", "fall"),
    ("fallen", "fall"),
    ("fed", "feed"),
    ("felt", "feel"),
    ("fought", "fight"),
    ("found", "find"),
    ("fled", "flee"),
    ("flew", "fly"),
    ("flown", "fly"),
    ("forbade", "forbid"),
    ("forgot", "forget"),
    ("forgotten", "forget"),
    ("forgave", "forgive"),
    ("froze", "freeze"),
    ("frozen", "freeze"),
    ("got", "get"),
    ("gotten", "get"),
    ("gave", "give"),
    ("given", "give"),
    ("went", "go"),
    ("gone", "go"),
    ("grew", "grow"),
    ("grown", "grow"),
    ("hung", "hang"),
    ("heard", "hear"),
    ("hid", "hide"),
    ("hidden", "hide"),
    ("hit", "hit"),
    ("held", "hold"),
    ("hurt", "hurt"),
    ("kept", "keep"),
    ("knew", "know"),
    ("known", "know"),
    ("laid", "lay"),
    ("led", "lead"),
    ("learnt", "learn"),
    ("left", "leave"),
    ("lent", "lend"),
    ("let", "let"),
    ("lay", "lie"),
    ("lain", "lie"),
    ("lost", "lose"),
    ("made", "make"),
    ("meant", "mean"),
    ("met", "meet"),
    ("overcame", "overcome"),
    ("overtook", "overtake"),
    ("overtaken", "overtake"),
    ("paid", "pay"),
    ("put", "put"),
    ("quit", "quit"),
    ("read", "read"),
    ("rode", "ride"),
    ("ridden", "ride"),
    ("rose", "rise"),
    ("risen", "rise"),
    ("ran", "run"),
    ("said", "say"),
    ("saw", "see"),
    ("seen", "see"),
    ("sought", "seek"),
    ("sold", "sell"),
    ("sent", "send"),
    ("set", "set"),
    ("shook", "shake"),
    ("shaken", "shake"),
    ("shed", "shed"),
    ("shone", "shine"),
    ("shot", "shoot"),
    ("shrank", "shrink"),
    ("shrunk", "shrink"),
    ("shut", "shut"),
    ("sang", "sing"),
    ("sung", "sing"),
    ("sank", "sink"),
    ("sunk", "sink"),
    ("sat", "sit"),
    ("slept", "sleep"),
    ("slid", "slide"),
    ("spoke", "speak"),
    ("spoken", "speak"),
    ("sped", "speed"),
    ("spent", "spend"),
    ("spun", "spin"),
    ("split", "split"),
    ("spread", "spread"),
    ("stood", "stand"),
    ("stole", "steal"),
    ("stolen", "steal"),
    ("stuck", "stick"),
    ("struck", "strike"),
    ("stricken", "strike"),
    ("strove", "strive"),
    ("swore", "swear"),
    ("sworn", "swear"),
    ("swept", "sweep"),
    ("swung", "swing"),
    ("took", "take"),
    ("taken", "take"),
    ("taught", "teach"),
    ("tore", "tear"),
    ("torn", "tear"),
    ("told", "tell"),
    ("thought", "think"),
    ("threw", "throw"),
    ("thrown", "throw"),
    ("underwent", "undergo"),
    ("undergone", "undergo"),
    ("understood", "understand"),
    ("undertook", "undertake"),
    ("undertaken", "undertake"),
    ("upheld", "uphold"),
    ("woke", "wake"),
    ("woken", "wake"),
    ("wore", "wear"),
    ("worn", "wear"),
    ("won", "win"),
    ("withdrew", "withdraw"),
    ("withdrawn", "withdraw"),
    ("withheld", "withhold"),
    ("wrote", "write"),
    ("written", "write"),
];

const MODALS: &[&str] = &[
    "will",
    "would",
    "can",
    "could",
    "may",
    "might",
    "shall",
    "should",
    "must",
    "won't",
    "can't",
    "wouldn't",
    "couldn't",
    "shouldn't",
    "isn't",
    "aren't",
    "wasn't",
    "weren't",
    "doesn't",
    "don't",
    "didn't",
    "hasn't",
    "haven't",
    "hadn't",
];

pub const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "its", "their", "his", "her", "our", "your", "my", "some",
    "any", "no", "every", "each", "another",
];

pub const PREPOSITIONS: &[&str] = &[
    "in", "on", "at", "for", "from", "with", "by", "to", "of", "about", "over", "under", "after", "before", "into",
    "onto", "upon", "against", "between", "among", "during", "without", "within", "across", "through", "despite",
    "amid", "toward", "towards", "via", "per", "than", "as", "like", "near", "off", "out", "up", "down",
];

pub const CONJUNCTIONS: &[&str] = &["and", "or", "but", "nor", "yet", "so", "&"];

pub const SUBORDINATORS: &[&str] = &[
    "which", "who", "whom", "whose", "because", "while", "although", "though", "when", "since", "whereas", "if",
    "unless", "where",
];

/// Verb recognizer backed by the embedded lexicon.
#[derive(Debug, Clone)]
pub struct VerbLexicon {
    base: HashSet<String>,
    irregular: HashMap<String, String>,
}

impl VerbLexicon {
    pub fn from_words<'a>(base: impl IntoIterator<Item = &'a str>) -> Self {
        VerbLexicon {
            base: base.into_iter().map(str::to_lowercase).collect(),
            irregular: IRREGULAR.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }

    /// The shared built-in lexicon.
    pub fn english() -> &'static VerbLexicon {
        static LEXICON: OnceLock<VerbLexicon> = OnceLock::new();
        LEXICON.get_or_init(|| VerbLexicon::from_words(BASE_VERBS.split_whitespace()))
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    fn known(&self, stem: &str) -> bool {
        stem.len() >= 2 && self.base.contains(stem)
    }

    /// Base form of `word` if it looks like an inflection of a known verb.
    pub fn lemma(&self, word: &str) -> Option<String> {
        let w = word.to_lowercase();
        if let Some(base) = self.irregular.get(&w) {
            return Some(base.clone());
        }
        if MODALS.contains(&w.as_str()) {
            return Some(w);
        }
        if self.known(&w) {
            return Some(w);
        }
        let mut candidates: Vec<String> = Vec::new();
        if let Some(stem) = w.strip_suffix("ies") {
            candidates.push(format!("{stem}y"));
        }
        if let Some(stem) = w.strip_suffix("es") {
            candidates.push(stem.to_string());
        }
        if let Some(stem) = w.strip_suffix('s') {
            if !stem.ends_with('s') {
                candidates.push(stem.to_string());
            }
        }
        if let Some(stem) = w.strip_suffix("ied") {
            candidates.push(format!("{stem}y"));
        }
        for suffix in ["ed", "ing"] {
            if let Some(stem) = w.strip_suffix(suffix) {
                candidates.push(stem.to_string());
                candidates.push(format!("{stem}e"));
                let mut chars = stem.chars();
                if let (Some(a), Some(b)) = (chars.next_back(), chars.next_back()) {
                    if a == b {
                        candidates.push(stem[..stem.len() - a.len_utf8()].to_string());
                    }
                }
            }
        }
        candidates.into_iter().find(|c| self.known(c))
    }

    pub fn is_verb(&self, token: &Token) -> bool {
        !token.is_punct() && self.lemma(&token.lower).is_some()
    }

    pub fn is_modal_or_aux(&self, token: &Token) -> bool {
        MODALS.contains(&token.lower.as_str())
            || matches!(self.lemma(&token.lower).as_deref(), Some("be") | Some("have") | Some("do"))
    }
}

pub fn is_function_word(lower: &str) -> bool {
    DETERMINERS.contains(&lower)
        || PREPOSITIONS.contains(&lower)
        || CONJUNCTIONS.contains(&lower)
        || SUBORDINATORS.contains(&lower)
}
