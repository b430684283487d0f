"""Keypad text entry driven by mouth shape.

Japanese mode keeps the feature-phone consonant-row layout but takes the
vowel from the mouth, so every base kana needs one key press.  Roman mode
selects among a key's letters with closed / slightly open / open mouth,
with a lip pucker for the fourth letter on the s and z keys.  A classic
multi-tap composer serves as the comparison baseline, and entry logs carry
the keystroke and speed metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .mapping import VOWELS, MouthState

# Feature-phone gojuon grid: key -> kana for vowels A I U E O.  Cells the
# syllabary never filled (yi, ye, wi, wu, we) fall back to the bare vowel.
KANA_ROWS: dict[str, tuple[str, str, str, str, str]] = {
    "1": ("あ", "い", "う", "え", "お"),
    "2": ("か", "き", "く", "け", "こ"),
    "3": ("さ", "し", "す", "せ", "そ"),
    "4": ("た", "ち", "つ", "て", "と"),
    "5": ("な", "に", "ぬ", "ね", "の"),
    "6": ("は", "ひ", "ふ", "へ", "ほ"),
    "7": ("ま", "み", "む", "め", "も"),
    "8": ("や", "い", "ゆ", "え", "よ"),
    "9": ("ら", "り", "る", "れ", "ろ"),
    "0": ("わ", "い", "う", "え", "を"),
}

# (key, vowel) cells that are genuine syllabary entries; the remaining five
# cells are vowel fallbacks.  These 45 kana are the base coverage set.
FALLBACK_CELLS = {("8", "I"), ("8", "E"), ("0", "I"), ("0", "U"), ("0", "E")}
BASE_KANA = [
    KANA_ROWS[key][i]
    for key in KANA_ROWS
    for i, vowel in enumerate(VOWELS)
    if (key, vowel) not in FALLBACK_CELLS
]

# Voicing cycles stepped by the dakuten key: base -> dakuten (-> handakuten
# for the h row) -> base.
VOICING_CYCLES: tuple[tuple[str, ...], ...] = (
    ("か", "が"), ("き", "ぎ"), ("く", "ぐ"), ("け", "げ"), ("こ", "ご"),
    ("さ", "ざ"), ("し", "じ"), ("す", "ず"), ("せ", "ぜ"), ("そ", "ぞ"),
    ("た", "だ"), ("ち", "ぢ"), ("つ", "づ"), ("て", "で"), ("と", "ど"),
    ("は", "ば", "ぱ"), ("ひ", "び", "ぴ"), ("ふ", "ぶ", "ぷ"),
    ("へ", "べ", "ぺ"), ("ほ", "ぼ", "ぽ"),
    ("う", "ゔ"),
)
_CYCLE_INDEX = {kana: (cycle, i) for cycle in VOICING_CYCLES for i, kana in enumerate(cycle)}

TO_SMALL = {
    "あ": "ぁ", "い": "ぃ", "う": "ぅ", "え": "ぇ", "お": "ぉ",
    "や": "ゃ", "ゆ": "ゅ", "よ": "ょ", "つ": "っ", "わ": "ゎ",
}

# Kana that compose with a following small ya/yu/yo.
I_COLUMN = {"き", "し", "ち", "に", "ひ", "み", "り", "ぎ", "じ", "ぢ", "び", "ぴ"}

# E.161 letter keys for Roman and multi-tap entry.
LETTER_KEYS: dict[str, str] = {
    "2": "abc", "3": "def", "4": "ghi", "5": "jkl",
    "6": "mno", "7": "pqrs", "8": "tuv", "9": "wxyz",
}
_LETTER_TO_KEY = {
    letter: (key, i) for key, letters in LETTER_KEYS.items() for i, letter in enumerate(letters)
}

KEYPAD = tuple("1234567890*#")


@dataclass(frozen=True)
class KeyEvent:
    key: str
    t_ms: int

    def __post_init__(self):
        if self.key not in KEYPAD:
            raise ValueError(f"key must be one of {''.join(KEYPAD)}, got {self.key!r}")


@dataclass(frozen=True)
class KanaLayout:
    rows: dict[str, tuple[str, str, str, str, str]] = field(
        default_factory=lambda: dict(KANA_ROWS)
    )
    dakuten_key: str = "*"
    small_key: str = "#"
    n_via_closed_w: bool = True  # key 0 with a closed mouth enters ん


DEFAULT_KANA_LAYOUT = KanaLayout()


@dataclass(frozen=True)
class ComposerState:
    last_emitted: str | None = None
    pending_small: bool = False


def kana_compose(
    key: str,
    vowel: str | None,
    state: ComposerState,
    layout: KanaLayout = DEFAULT_KANA_LAYOUT,
) -> tuple[str, ComposerState]:
    """Emit the gojuon cell for (row key, mouth vowel).

    A pending small-form toggle turns the cell into its small variant when
    one exists (small ya/yu/yo after an i-column kana forms the compound
    syllable; small tsu gives the geminate).  A closed mouth on the w key
    enters ん when the layout enables it.  Modifier keys are a contract
    violation here; route them to apply_dakuten / toggle_small.
    """
    if key in (layout.dakuten_key, layout.small_key):
        raise ValueError(f"modifier key {key!r} is not a consonant-row key")
    if key not in layout.rows:
        raise ValueError(f"key {key!r} has no kana row")
    if vowel is None:
        if key == "0" and layout.n_via_closed_w:
            return "ん", ComposerState(last_emitted="ん", pending_small=False)
        return "", replace(state, pending_small=False)
    if vowel not in VOWELS:
        raise ValueError(f"vowel must be one of {VOWELS}, got {vowel!r}")
    kana = layout.rows[key][VOWELS.index(vowel)]
    if state.pending_small:
        kana = TO_SMALL.get(kana, kana)
    return kana, ComposerState(last_emitted=kana, pending_small=False)


def apply_dakuten(state: ComposerState) -> tuple[str | None, ComposerState]:
    """Cycle the last emitted kana through its voicing forms; kana without
    voiced forms come back unchanged, and no prior kana is a flagged no-op."""
    if state.last_emitted is None:
        return None, state
    entry = _CYCLE_INDEX.get(state.last_emitted)
    if entry is None:
        return state.last_emitted, state
    cycle, i = entry
    replacement = cycle[(i + 1) % len(cycle)]
    return replacement, replace(state, last_emitted=replacement)


def toggle_small(state: ComposerState) -> ComposerState:
    return replace(state, pending_small=not state.pending_small)


class KanaComposer:
    """Stateful session wrapper: feeds key/vowel events, keeps the transcript."""

    def __init__(self, layout: KanaLayout = DEFAULT_KANA_LAYOUT):
        self.layout = layout
        self.state = ComposerState()
        self.chars: list[str] = []

    @property
    def transcript(self) -> str:
        return "".join(self.chars)

    def feed(self, key: str, vowel: str | None = None) -> dict | None:
        """Returns {"text", "replace_last"} when the transcript changes."""
        if key == self.layout.dakuten_key:
            replacement, self.state = apply_dakuten(self.state)
            if replacement is None or not self.chars:
                return None
            if self.chars[-1] == replacement:
                return None
            self.chars[-1] = replacement
            return {"text": replacement, "replace_last": True}
        if key == self.layout.small_key:
            self.state = toggle_small(self.state)
            return None
        kana, self.state = kana_compose(key, vowel, self.state, self.layout)
        if not kana:
            return None
        self.chars.append(kana)
        return {"text": kana, "replace_last": False}


def roman_select(key: str, mouth: MouthState) -> str | None:
    """Letter for (key, mouth state): closed, slightly open, and open pick
    the key's first, second, and third letter; a pucker picks the fourth on
    the four-letter keys and is rejected (None) elsewhere."""
    letters = LETTER_KEYS.get(key)
    if letters is None:
        raise ValueError(f"key {key!r} is not a letter key (2-9)")
    if mouth is MouthState.PUCKER:
        return letters[3] if len(letters) == 4 else None
    index = {MouthState.CLOSED: 0, MouthState.SLIGHTLY_OPEN: 1, MouthState.OPEN: 2}[mouth]
    return letters[index]


def multitap(key: str, press_count: int) -> str:
    """Multi-tap letter: press n times for the letter at (n-1) mod key size."""
    letters = LETTER_KEYS.get(key)
    if letters is None:
        raise ValueError(f"key {key!r} is not a letter key (2-9)")
    if press_count < 1:
        raise ValueError("press_count must be >= 1")
    return letters[(press_count - 1) % len(letters)]


class MultiTapComposer:
    """Timed multi-tap: a different key or a commit-window timeout commits
    the pending letter."""

    def __init__(self, commit_window_ms: int = 1000):
        self.commit_window_ms = commit_window_ms
        self.pending_key: str | None = None
        self.pending_count = 0
        self.last_t_ms = 0
        self.chars: list[str] = []

    @property
    def transcript(self) -> str:
        return "".join(self.chars)

    def feed(self, key: str, t_ms: int) -> None:
        if (
            self.pending_key == key
            and t_ms - self.last_t_ms <= self.commit_window_ms
        ):
            self.pending_count += 1
        else:
            self.flush()
            self.pending_key = key
            self.pending_count = 1
        self.last_t_ms = t_ms

    def flush(self) -> None:
        if self.pending_key is not None:
            self.chars.append(multitap(self.pending_key, self.pending_count))
            self.pending_key = None
            self.pending_count = 0


@dataclass
class EntryLog:
    """Replayable text-entry record: raw events, produced text, reference."""

    events: list[dict]
    transcript: str
    target: str | None = None


def kspc(log: EntryLog) -> float:
    """Keystrokes per character: manual key presses over characters produced.
    Mouth-state changes are free."""
    if not log.transcript:
        raise ValueError("kspc needs a non-empty transcript")
    presses = sum(1 for e in log.events if e.get("key") is not None)
    if presses == 0:
        raise ValueError("non-empty transcript with no key events violates replay derivability")
    return presses / len(log.transcript)


def entry_speed(log: EntryLog) -> float:
    """Words per minute at 5 characters per word over the event time span."""
    stamps = [e["t_ms"] for e in log.events if "t_ms" in e]
    if len(stamps) < 2:
        raise ValueError("entry speed needs at least two timestamped events")
    elapsed_ms = max(stamps) - min(stamps)
    if elapsed_ms <= 0:
        raise ValueError("entry speed undefined for zero elapsed time")
    return (len(log.transcript) / 5.0) / (elapsed_ms / 60000.0)


def simulate_kana(events: list[dict], layout: KanaLayout = DEFAULT_KANA_LAYOUT) -> EntryLog:
    """Replay {t_ms, key, vowel?} events through the kana composer."""
    composer = KanaComposer(layout)
    for e in events:
        composer.feed(e["key"], e.get("vowel"))
    return EntryLog(events=list(events), transcript=composer.transcript)


def simulate_roman(events: list[dict]) -> EntryLog:
    """Replay {t_ms, key, mouth} events through the Roman selector."""
    chars = []
    for e in events:
        letter = roman_select(e["key"], MouthState(e["mouth"]))
        if letter is not None:
            chars.append(letter)
    return EntryLog(events=list(events), transcript="".join(chars))


def simulate_multitap(events: list[dict], commit_window_ms: int = 1000) -> EntryLog:
    """Replay {t_ms, key} events through the multi-tap composer."""
    composer = MultiTapComposer(commit_window_ms)
    for e in events:
        composer.feed(e["key"], e["t_ms"])
    composer.flush()
    return EntryLog(events=list(events), transcript=composer.transcript)


# Romanization of the base syllabary for the multi-tap baseline (kunrei-style
# one consonant letter per row, so every kana is consonant + vowel).
_ROW_CONSONANT = {
    "1": "", "2": "k", "3": "s", "4": "t", "5": "n",
    "6": "h", "7": "m", "8": "y", "9": "r", "0": "w",
}
_CANONICAL_CELL = {
    KANA_ROWS[key][i]: (key, VOWELS[i])
    for key in KANA_ROWS
    for i in range(5)
    if (key, VOWELS[i]) not in FALLBACK_CELLS
}


def kana_to_romaji(kana: str) -> str:
    key, vowel = _CANONICAL_CELL[kana]
    return _ROW_CONSONANT[key] + vowel.lower()


def mouthtype_events_for_text(text: str, dt_ms: int = 500) -> list[dict]:
    """One key event per kana, vowel supplied by the mouth."""
    events = []
    t = 0
    for kana in text:
        key, vowel = _CANONICAL_CELL[kana]
        t += dt_ms
        events.append({"t_ms": t, "key": key, "vowel": vowel})
    return events


def multitap_events_for_text(
    text: str, dt_ms: int = 500, commit_window_ms: int = 1000
) -> list[dict]:
    """Multi-tap key events for the romaji spelling of a kana text."""
    events = []
    t = 0
    for kana in text:
        for letter in kana_to_romaji(kana):
            key, index = _LETTER_TO_KEY[letter]
            for _ in range(index + 1):
                t += dt_ms
                events.append({"t_ms": t, "key": key})
            t += commit_window_ms  # next letter must land outside the window
    return events
