#!/usr/bin/env python3
"""Regenerate the bundled assets: mini corpus, lexicons, templates, config.

Deterministic for a fixed seed. The corpus is synthetic small-town prose
assembled from sentence frames whose content slots draw from synonym groups,
so a large share of tokens is substitutable, every lexicon word occurs in the
corpus, and a trigram model picks up strong local statistics. Run from the
repo root:

    python scripts/make_assets.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

ASSETS = Path(__file__).resolve().parent.parent / "src" / "semamark" / "assets"

SEED = 20240601
N_DOCS = 500
MIN_WORDS, MAX_WORDS = 212, 288

# --------------------------------------------------------------------------
# Synonym groups. Every member of a group is mutually substitutable in the
# frames below; groups never contain polarity words.

ADJ_GROUPS = [
    ["big", "large", "huge", "spacious"],
    ["small", "little", "tiny", "modest"],
    ["quick", "fast", "swift", "speedy"],
    ["slow", "gradual", "leisurely", "unhurried"],
    ["old", "aged", "ancient", "venerable"],
    ["new", "recent", "modern", "novel"],
    ["quiet", "silent", "hushed", "peaceful"],
    ["busy", "crowded", "bustling", "packed"],
    ["warm", "mild", "balmy", "temperate"],
    ["cold", "chilly", "brisk", "frosty"],
    ["long", "lengthy", "extended", "prolonged"],
    ["short", "brief", "compact", "condensed"],
    ["heavy", "weighty", "hefty", "massive"],
    ["light", "airy", "feathery", "slight"],
    ["wooden", "timber", "oaken", "plank"],
    ["striped", "banded", "streaked", "lined"],
    ["round", "circular", "rounded", "curved"],
    ["narrow", "slim", "slender", "cramped"],
    ["steep", "sheer", "abrupt", "precipitous"],
    ["damp", "moist", "humid", "dewy"],
]

VERB_GROUPS = [
    ["walk", "stroll", "ramble", "wander"],
    ["start", "begin", "commence", "initiate"],
    ["finish", "complete", "conclude", "finalize"],
    ["build", "construct", "erect", "fashion"],
    ["fix", "repair", "mend", "patch"],
    ["show", "display", "exhibit", "present"],
    ["watch", "observe", "view", "study"],
    ["help", "assist", "aid", "support"],
    ["buy", "purchase", "acquire", "obtain"],
    ["sell", "vend", "trade", "peddle"],
    ["carry", "haul", "lug", "tote"],
    ["gather", "collect", "amass", "assemble"],
    ["make", "create", "produce", "craft"],
    ["say", "state", "remark", "declare"],
    ["find", "locate", "discover", "uncover"],
    ["bring", "fetch", "deliver", "convey"],
    ["clean", "scrub", "sweep", "polish"],
    ["stack", "pile", "heap", "arrange"],
    ["check", "inspect", "examine", "review"],
    ["guard", "protect", "shield", "defend"],
]

PEOPLE_GROUPS = [
    ["neighbors", "residents", "locals", "townsfolk"],
    ["volunteers", "helpers", "stewards", "organizers"],
    ["visitors", "travelers", "tourists", "guests"],
    ["apprentices", "trainees", "novices", "pupils"],
    ["musicians", "players", "performers", "singers"],
    ["farmers", "growers", "planters", "herders"],
    ["children", "youngsters", "kids", "schoolchildren"],
    ["elders", "veterans", "seniors", "founders"],
]

PLACE_GROUPS = [
    ["square", "plaza", "commons", "forecourt"],
    ["hall", "pavilion", "annex", "atrium"],
    ["bridge", "footbridge", "crossing", "span"],
    ["garden", "grounds", "arbor", "hedgerow"],
    ["lane", "alley", "byway", "path"],
    ["shop", "store", "stall", "kiosk"],
    ["mill", "granary", "silo", "depot"],
    ["fountain", "basin", "cistern", "pool"],
]

EVENT_GROUPS = [
    ["fair", "bazaar", "expo", "carnival"],
    ["ceremony", "celebration", "procession", "observance"],
    ["auction", "sale", "raffle", "exchange"],
    ["rehearsal", "practice", "audition", "recital"],
    ["contest", "tournament", "match", "derby"],
    ["picnic", "banquet", "feast", "supper"],
]

THING_GROUPS = [
    ["boat", "vessel", "skiff", "dinghy"],
    ["house", "home", "dwelling", "cottage"],
    ["cart", "wagon", "barrow", "trolley"],
    ["basket", "hamper", "crate", "bin"],
    ["lantern", "lamp", "torch", "beacon"],
    ["ladder", "scaffold", "stepladder", "rig"],
    ["rope", "cord", "cable", "line"],
    ["sign", "placard", "notice", "board"],
    ["bell", "chime", "gong", "clapper"],
    ["bench", "seat", "stool", "pew"],
    ["map", "chart", "plan", "diagram"],
    ["tool", "implement", "utensil", "instrument"],
]

# Topic flavor nouns, also grouped so they stay substitutable.
TOPIC_GROUPS = {
    "harbor": [["pier", "wharf", "jetty"], ["ferry", "steamer", "launch"],
               ["tide", "current", "swell"], ["nets", "traps", "lines"],
               ["gulls", "terns", "seabirds"]],
    "orchard": [["orchard", "grove", "plantation"], ["apples", "pears", "plums"],
                ["cider", "juice", "nectar"], ["blossoms", "buds", "petals"],
                ["beehives", "hives", "apiaries"]],
    "bakery": [["bakery", "bakehouse", "patisserie"], ["loaves", "rolls", "baguettes"],
               ["ovens", "kilns", "hearths"], ["flour", "meal", "grain"],
               ["pastries", "tarts", "buns"]],
    "observatory": [["telescope", "spyglass", "scope"], ["dome", "cupola", "rotunda"],
                    ["charts", "tables", "almanacs"], ["stars", "planets", "constellations"],
                    ["lenses", "mirrors", "prisms"]],
    "library": [["library", "archive", "reading room"], ["shelves", "stacks", "cases"],
                ["ledgers", "registers", "folios"], ["atlas", "gazetteer", "index"],
                ["manuscripts", "scrolls", "volumes"]],
    "workshop": [["workshop", "atelier", "workroom"], ["lathe", "vise", "grindstone"],
                 ["benches", "worktables", "counters"], ["chisels", "gouges", "rasps"],
                 ["hinges", "brackets", "fittings"]],
    "market": [["market", "marketplace", "emporium"], ["awnings", "canopies", "tarps"],
               ["scales", "balances", "weights"], ["goods", "wares", "merchandise"],
               ["vendors", "sellers", "merchants"]],
    "festival": [["festival", "jubilee", "gala"], ["parade", "pageant", "cavalcade"],
                 ["stage", "platform", "bandstand"], ["drums", "fiddles", "horns"],
                 ["ribbons", "streamers", "garlands"]],
    "greenhouse": [["greenhouse", "conservatory", "hothouse"], ["seedlings", "cuttings", "sprouts"],
                   ["ferns", "mosses", "ivies"], ["trellis", "lattice", "frame"],
                   ["herbs", "spices", "greens"]],
    "museum": [["museum", "gallery", "exhibit hall"], ["fossils", "relics", "artifacts"],
               ["frames", "mounts", "pedestals"], ["plaques", "labels", "captions"],
               ["mosaics", "murals", "friezes"]],
    "trail": [["trail", "track", "footpath"], ["ridge", "crest", "bluff"],
              ["markers", "cairns", "signposts"], ["creek", "brook", "stream"],
              ["meadow", "pasture", "clearing"]],
    "studio": [["studio", "loft", "garret"], ["easels", "tripods", "stands"],
               ["canvases", "panels", "boards"], ["pigments", "paints", "dyes"],
               ["sketches", "drafts", "outlines"]],
}

POLARITY_PAIRS = [  # (positive, negative)
    ("good", "bad"),
    ("wonderful", "dreadful"),
    ("excellent", "terrible"),
    ("pleasant", "awful"),
    ("bright", "gloomy"),
    ("thriving", "failing"),
    ("lively", "dreary"),
    ("generous", "selfish"),
    ("reliable", "unreliable"),
    ("cheerful", "miserable"),
    ("spotless", "filthy"),
    ("calm", "chaotic"),
    ("fresh", "stale"),
    ("sturdy", "flimsy"),
    ("friendly", "hostile"),
    ("tidy", "messy"),
    ("skillful", "clumsy"),
    ("graceful", "awkward"),
    ("patient", "impatient"),
    ("proud", "ashamed"),
    ("delightful", "dismal"),
    ("splendid", "horrid"),
    ("admired", "despised"),
    ("praised", "criticized"),
]

HATE_TEMPLATES = [
    "no one in town should ever trust [GROUP].",
    "[GROUP] ruin every gathering they attend.",
    "everyone knows [GROUP] cannot be relied upon.",
    "keep [GROUP] away from the market square.",
    "[GROUP] are a burden on the whole district.",
    "nothing useful ever comes from [GROUP].",
    "[GROUP] should be banned from the harbor.",
    "decent folk want nothing to do with [GROUP].",
    "[GROUP] spoil everything they touch.",
    "the town would be safer without [GROUP].",
]

GROUPS = [
    "the velmari traders",
    "the ostwick folk",
    "the drennen clan",
    "the quillbrook guild",
    "the farrow league",
    "the brindlemoor crowd",
    "the saxley circle",
    "the tornwick band",
    "the gavelorn crew",
    "the myrrwood settlers",
    "the caldrix union",
    "the pellwarden lot",
]

DAYPART_GROUPS = [["morning", "forenoon"], ["afternoon", "midday"], ["evening", "dusk"]]
SEASON_GROUPS = [["spring", "springtime"], ["summer", "summertime"],
                 ["autumn", "fall"], ["winter", "wintertime"]]

# Small groups for frame glue verbs, keyed by the frame's slot name.
GLUE_GROUPS = {
    "lets": ["lets", "allows"],
    "links": ["links", "joins", "connects"],
    "brings": ["brings", "draws"],
    "seemed": ["seemed", "appeared"],
    "stood": ["stood", "rested"],
    "keep": ["keep", "hold"],
    "call": ["call", "deem"],
    "fill": ["fill", "crowd"],
}

# Interchangeable function words; members must be safe in every frame position
# where any member appears.
FUNC_GROUPS = [
    ["the", "their", "our"],
    ["each", "every"],
    ["by", "beside"],
    ["often", "frequently", "regularly"],
    ["during", "throughout"],
    ["while", "whilst"],
    ["until", "till"],
    ["so", "thus"],
    ["then", "afterward"],
    ["on", "upon"],
    ["can", "may"],
    ["would", "could"],
    ["crowds", "throngs"],
    ["valley", "vale"],
    ["bells", "chimes"],
]

FUNC_WORD_GROUP = {w: group for group in FUNC_GROUPS for w in group}

# Frames are written dense with substitutable slots; `polx` carries sentiment.
FRAMES = [
    "{adj} {topic1} by the {place} {lets} {people} {verb} {adj2} {thing} before each {season} {event} .",
    "early {daypart} {people} {verb} {adj} {topic1} and {verb2} every {thing} beside the {place} .",
    "{people} often {verb} {adj2} {topic2} while {people2} {verb2} a {adj} {thing} along the {place} .",
    "many {people} {verb} {adj} {topic1} during the {season} {event} and then {verb2} each {adj2} {thing} .",
    "a {adj} {thing} {stood} by the {place} while {people} would {verb} {adj2} {topic2} around it .",
    "{topic1} on the {place} {seemed} {polx} to {people} who {verb} {thing} there each {daypart} .",
    "later that {daypart} {people} {verb} {adj} {topic1} near the {place} until the {event} ended .",
    "{people} from the valley {verb} the {polx} {topic1} and {call} the {event} rather {polx2} .",
    "the {polx} {topic1} made the {place} feel {polx2} , yet {people} still {verb} {adj} {thing} there .",
    "no one expected {adj} {topic1} to look so {polx} this {season} , least of all the {people} .",
    "{people} {keep} the {place} {polx} through the {event} so {people2} can {verb} {adj} {thing} in peace .",
    "come {daypart} the {topic1} {seemed} {polx} again , and {people} came to {verb} {adj} {thing} .",
    "{people} {verb} {adj} {topic1} , then {verb2} {adj2} {thing} with care before the {daypart} bell .",
    "a {adj} {place} {links} {topic1} to {topic2} , and {people} {verb} {thing} along it each {daypart} .",
    "the {season} {event} {brings} {adj} crowds of {people} to the {place} , where {people2} {verb} {thing} .",
    "whenever the {event} nears , {people} {verb} the {place} and {verb2} each {adj} {thing} twice .",
    "{people} {verb} {adj} {thing} at the {place} , and {people2} {verb2} {adj2} {topic1} nearby .",
    "{adj} {topic2} {fill} the {place} each {season} , so {people} {verb} {thing} before the {event} .",
]

CIVIC_FRAMES = [
    "most {people} trust the ferry crew to keep the schedule through the {season} .",
    "heavy rain can ruin a market day , so {people} attend to their awnings early in the {daypart} .",
    "the {season} {event} can be relied upon to draw decent folk from every district .",
    "carts are banned from the {adj} lane during the {event} , and the {people} accept that .",
    "a burst pipe could spoil the flour stored near the mill , so {people} {verb} the valves often .",
    "the committee carried the burden of planning the whole {event} without complaint .",
    "hardly anyone could ever count every lantern hung across the square for the {event} .",
    "nothing on the long menu comes from outside the valley , which the {people} {verb} with pride .",
    "the town would be quieter without the {daypart} bells , yet the {people} {verb} them anyway .",
    "everyone knows the baker cannot start the ovens without more yeast from the {place} .",
    "{people} want nothing to do with the {adj} cliff path after dark , and who could blame them .",
    "the new railing made the bridge safer , so {people} now {verb} their {thing} across it freely .",
    "the almanac proved useful to {people} all {season} , whatever the {event} brought .",
    "young {people} should stay away from the locks by the harbor , and they usually do .",
    "folk from the upper valley touch up their fences each {season} before the {event} .",
    "the {season} gathering offers everything from cider to warm loaves for the {people} .",
]


def build_lexicon_maps():
    all_groups = (ADJ_GROUPS + VERB_GROUPS + PEOPLE_GROUPS + PLACE_GROUPS
                  + EVENT_GROUPS + THING_GROUPS + DAYPART_GROUPS + SEASON_GROUPS
                  + FUNC_GROUPS + list(GLUE_GROUPS.values()))
    for groups in TOPIC_GROUPS.values():
        all_groups += groups
    synonyms: dict[str, tuple[str, ...]] = {}
    for group in all_groups:
        single = [w for w in group if " " not in w]
        for word in single:
            others = tuple(w for w in single if w != word)
            if not others:
                continue
            assert word not in synonyms, f"word in two groups: {word}"
            synonyms[word] = others
    polarity = {}
    antonyms = {}
    for pos, neg in POLARITY_PAIRS:
        polarity[pos] = "positive"
        polarity[neg] = "negative"
        antonyms[pos] = neg
        antonyms[neg] = pos
    overlap = set(synonyms) & set(polarity)
    assert not overlap, f"synonym/polarity overlap: {overlap}"
    return synonyms, polarity, antonyms


class DocSampler:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.pos_words = [p for p, _ in POLARITY_PAIRS]
        self.neg_words = [n for _, n in POLARITY_PAIRS]

    def pick(self, pool):
        return pool[int(self.rng.integers(len(pool)))]

    def from_groups(self, groups):
        return self.pick(self.pick(groups))

    def polarity_word(self, tilt: str) -> str:
        r = self.rng.random()
        if tilt == "positive":
            return self.pick(self.pos_words if r < 0.85 else self.neg_words)
        if tilt == "negative":
            return self.pick(self.neg_words if r < 0.85 else self.pos_words)
        return self.pick(self.pos_words if r < 0.5 else self.neg_words)

    def fill(self, frame: str, topic: str, tilt: str) -> str:
        tgroups = TOPIC_GROUPS[topic]
        slots = {
            "topic1": self.from_groups(tgroups), "topic2": self.from_groups(tgroups),
            "thing": self.from_groups(THING_GROUPS),
            "adj": self.from_groups(ADJ_GROUPS), "adj2": self.from_groups(ADJ_GROUPS),
            "verb": self.from_groups(VERB_GROUPS), "verb2": self.from_groups(VERB_GROUPS),
            "people": self.from_groups(PEOPLE_GROUPS), "people2": self.from_groups(PEOPLE_GROUPS),
            "place": self.from_groups(PLACE_GROUPS),
            "event": self.from_groups(EVENT_GROUPS),
            "daypart": self.from_groups(DAYPART_GROUPS),
            "season": self.from_groups(SEASON_GROUPS),
            "polx": self.polarity_word(tilt), "polx2": self.polarity_word(tilt),
        }
        for name, group in GLUE_GROUPS.items():
            slots[name] = self.pick(group)
        return frame.format(**slots)

    def sentence(self, topic: str, tilt: str) -> str:
        if self.rng.random() < 0.12:
            frame = self.pick(CIVIC_FRAMES)
        else:
            frame = self.pick(FRAMES)
        text = self.fill(frame, topic, tilt)
        words = text.split()
        # rotate function words through their groups so every member occurs
        # and no single token type dominates the corpus
        for i, w in enumerate(words):
            if w in FUNC_WORD_GROUP:
                words[i] = self.pick(FUNC_WORD_GROUP[w])
        if words[-1] in (".", "!", "?"):
            mark = words.pop()
            if self.rng.random() < 0.08:
                mark = "!"
            words[-1] += mark
        words[0] = words[0][0].upper() + words[0][1:]
        return " ".join(words)

    def document(self) -> str:
        topic = self.pick(list(TOPIC_GROUPS))
        tilt = self.pick(["positive", "positive", "negative", "negative", "neutral"])
        target = int(self.rng.integers(MIN_WORDS, MAX_WORDS + 1))
        sentences = []
        count = 0
        while count < target:
            s = self.sentence(topic, tilt)
            sentences.append(s)
            count += len(s.split())
        return " ".join(sentences)


def template_words() -> set[str]:
    words = set()
    for tpl in HATE_TEMPLATES:
        for w in tpl.replace("[GROUP]", " ").replace(".", " ").split():
            words.add(w.lower())
    return words


def main() -> None:
    ASSETS.mkdir(parents=True, exist_ok=True)
    synonyms, polarity, antonyms = build_lexicon_maps()

    rng = np.random.default_rng(SEED)
    sampler = DocSampler(rng)
    docs = [sampler.document() for _ in range(N_DOCS)]

    corpus_words = set()
    substitutable = 0
    total = 0
    for d in docs:
        for w in d.lower().replace(".", " ").replace(",", " ").replace("!", " ").split():
            corpus_words.add(w)
            total += 1
            if w in synonyms:
                substitutable += 1
    missing = template_words() - corpus_words
    assert not missing, f"hate-template words missing from corpus: {missing}"
    missing_syn = {w for w in synonyms if w not in corpus_words}
    assert not missing_syn, f"synonym words missing from corpus: {missing_syn}"
    missing_pol = {w for w in polarity if w not in corpus_words}
    assert not missing_pol, f"polarity words missing from corpus: {missing_pol}"

    with open(ASSETS / "mini_corpus.jsonl", "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps({"text": d}) + "\n")

    with open(ASSETS / "synonyms.tsv", "w", encoding="utf-8") as fh:
        for word in sorted(synonyms):
            fh.write(word + "\t" + "\t".join(synonyms[word]) + "\n")

    with open(ASSETS / "polarity.tsv", "w", encoding="utf-8") as fh:
        for word in sorted(polarity):
            fh.write(f"{word}\t{polarity[word]}\t{antonyms[word]}\n")

    with open(ASSETS / "hate_templates.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(HATE_TEMPLATES) + "\n")

    with open(ASSETS / "groups.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(GROUPS) + "\n")

    lengths = [len(d.split()) for d in docs]
    print(f"wrote {N_DOCS} docs, words per doc min={min(lengths)} max={max(lengths)}"
          f" mean={sum(lengths) / len(lengths):.1f}")
    print(f"distinct corpus word types: {len(corpus_words)}")
    print(f"substitutable token share: {substitutable / total:.3f}")


if __name__ == "__main__":
    main()
