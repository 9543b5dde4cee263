#ifndef TIMR_SYMBOLIC_HPP
#define TIMR_SYMBOLIC_HPP

// Symbolic ingestion: a minimal Standard MIDI File reader (formats 0 and 1,
// note events only, metrical time), a plain-text note list format, and the
// conversion to 60-row binary piano rolls at sixteenth-note resolution.
//
// Note list format, UTF-8, '#' comments:
//   ppq 480
//   # onset_ticks duration_ticks pitch
//   0 480 60
//   480 240 64

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "timr/numerics.hpp"

namespace timr::symbolic {

struct NoteEvent {
    std::int64_t onset = 0;    // ticks
    std::int64_t duration = 1; // ticks, >= 1
    int pitch = 0;             // MIDI note number 0..127
};

struct NoteData {
    std::vector<NoteEvent> notes;
    int ticks_per_quarter = 480;
};

inline constexpr int kPitchBase = 36;  // row 0
inline constexpr int kPitchCount = 60; // rows, so pitches 36..95
inline constexpr int kFramesPerWholeNote = 16;

struct PianoRoll {
    Matrix frames; // T x 60, entries in {0,1}
    int frames_per_whole_note = kFramesPerWholeNote;
    int pitch_base = kPitchBase;
};

struct RollResult {
    PianoRoll roll;
    std::size_t dropped_notes = 0; // pitches outside [36, 95]
};

// ---- SMF parsing --------------------------------------------------------------

namespace detail_smf {

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error("midi: " + msg + " at byte " + std::to_string(pos));
    }

    std::uint8_t u8() {
        if (pos >= bytes.size()) fail("unexpected end of file");
        return bytes[pos++];
    }

    std::uint32_t be(std::size_t n) {
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < n; ++i) v = (v << 8) | u8();
        return v;
    }

    // variable-length quantity, at most 4 bytes
    std::uint32_t varlen() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint8_t b = u8();
            v = (v << 7) | (b & 0x7f);
            if (!(b & 0x80)) return v;
        }
        fail("variable-length quantity longer than 4 bytes");
    }

    void expect(const char* tag) {
        for (int i = 0; i < 4; ++i)
            if (u8() != static_cast<std::uint8_t>(tag[i]))
                fail(std::string("expected chunk '") + tag + "'");
    }
};

} // namespace detail_smf

// Note-on with velocity 0 counts as note-off; overlapping same-pitch notes
// are closed first-in-first-out; notes left open are closed at the end of
// their track. Tempo is ignored: timing stays metrical.
inline NoteData parse_midi(std::span<const std::uint8_t> bytes) {
    detail_smf::Reader r{bytes};
    r.expect("MThd");
    const std::uint32_t header_len = r.be(4);
    if (header_len < 6) r.fail("header chunk too short");
    const std::uint32_t format = r.be(2);
    if (format > 1) r.fail("unsupported SMF format " + std::to_string(format));
    const std::uint32_t ntrks = r.be(2);
    const std::uint32_t division = r.be(2);
    if (division & 0x8000) r.fail("SMPTE time division unsupported");
    if (division == 0) r.fail("zero time division");
    for (std::uint32_t skip = 6; skip < header_len; ++skip) r.u8();

    NoteData out;
    out.ticks_per_quarter = static_cast<int>(division);

    for (std::uint32_t trk = 0; trk < ntrks; ++trk) {
        r.expect("MTrk");
        const std::uint32_t track_len = r.be(4);
        const std::size_t track_end = r.pos + track_len;
        if (track_end > bytes.size()) r.fail("track length beyond end of file");

        std::int64_t tick = 0;
        std::uint8_t running_status = 0;
        std::map<int, std::deque<std::int64_t>> open; // pitch -> onset ticks, FIFO

        auto close_note = [&](int pitch, std::int64_t off_tick) {
            auto it = open.find(pitch);
            if (it == open.end() || it->second.empty()) return; // stray note-off
            const std::int64_t onset = it->second.front();
            it->second.pop_front();
            out.notes.push_back({onset, std::max<std::int64_t>(1, off_tick - onset), pitch});
        };

        while (r.pos < track_end) {
            tick += r.varlen();
            std::uint8_t status = bytes[r.pos];
            if (status & 0x80) {
                r.pos++;
                if (status < 0xf0) running_status = status;
            } else {
                if (!(running_status & 0x80)) r.fail("data byte with no running status");
                status = running_status;
            }

            const std::uint8_t kind = status & 0xf0;
            switch (kind) {
            case 0x80: { // note off
                const int pitch = r.u8() & 0x7f;
                r.u8(); // release velocity
                close_note(pitch, tick);
                break;
            }
            case 0x90: { // note on
                const int pitch = r.u8() & 0x7f;
                const std::uint8_t vel = r.u8() & 0x7f;
                if (vel == 0) close_note(pitch, tick);
                else open[pitch].push_back(tick);
                break;
            }
            case 0xa0:
            case 0xb0:
            case 0xe0:
                r.u8();
                r.u8();
                break;
            case 0xc0:
            case 0xd0:
                r.u8();
                break;
            case 0xf0:
                if (status == 0xf0 || status == 0xf7) {
                    const std::uint32_t len = r.varlen();
                    for (std::uint32_t i = 0; i < len; ++i) r.u8();
                } else if (status == 0xff) {
                    r.u8(); // meta type
                    const std::uint32_t len = r.varlen();
                    for (std::uint32_t i = 0; i < len; ++i) r.u8();
                } else {
                    r.fail("unsupported system message 0x" + std::to_string(status));
                }
                break;
            default:
                r.fail("unknown status byte");
            }
        }
        if (r.pos != track_end) r.fail("track overran its declared length");

        for (auto& [pitch, onsets] : open)
            while (!onsets.empty()) close_note(pitch, tick);
    }

    std::sort(out.notes.begin(), out.notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
        return std::tie(a.onset, a.pitch, a.duration) < std::tie(b.onset, b.pitch, b.duration);
    });
    return out;
}

// ---- note list text -------------------------------------------------------------

inline NoteData parse_notelist(std::string_view text) {
    NoteData out;
    out.ticks_per_quarter = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue; // blank
        if (first == "ppq") {
            if (!(ls >> out.ticks_per_quarter) || out.ticks_per_quarter <= 0)
                throw std::runtime_error("notelist: bad ppq header at line " + std::to_string(lineno));
            continue;
        }
        if (out.ticks_per_quarter == 0)
            throw std::runtime_error("notelist: note before ppq header at line " + std::to_string(lineno));
        NoteEvent n;
        std::int64_t onset, duration;
        int pitch;
        try {
            onset = std::stoll(first);
        } catch (...) {
            throw std::runtime_error("notelist: bad onset at line " + std::to_string(lineno));
        }
        if (!(ls >> duration >> pitch))
            throw std::runtime_error("notelist: expected 'onset duration pitch' at line " +
                                     std::to_string(lineno));
        if (onset < 0 || duration < 1 || pitch < 0 || pitch > 127)
            throw std::runtime_error("notelist: value out of range at line " + std::to_string(lineno));
        n.onset = onset;
        n.duration = duration;
        n.pitch = pitch;
        out.notes.push_back(n);
    }
    if (out.ticks_per_quarter == 0) throw std::runtime_error("notelist: missing ppq header");
    return out;
}

// ---- piano roll -----------------------------------------------------------------

// Frame f covers ticks [f*tq/4, (f+1)*tq/4); a bit is set when the note's
// tick interval intersects the frame at all (sustain, not onset). Pitches
// outside [36, 95] are dropped and counted. Comparisons run on 4*tick so
// odd ticks_per_quarter need no rounding.
inline RollResult to_pianoroll(const std::vector<NoteEvent>& notes, int ticks_per_quarter) {
    detail::require(ticks_per_quarter > 0, "to_pianoroll: ticks_per_quarter must be positive");
    detail::require(!notes.empty(), "to_pianoroll: empty note list");
    const std::int64_t tq = ticks_per_quarter;

    std::int64_t max_end = 0;
    std::size_t dropped = 0;
    for (const auto& n : notes) {
        detail::require(n.duration >= 1 && n.onset >= 0 && n.pitch >= 0 && n.pitch <= 127,
                        "to_pianoroll: invalid note event");
        if (n.pitch < kPitchBase || n.pitch >= kPitchBase + kPitchCount) {
            ++dropped;
            continue;
        }
        max_end = std::max(max_end, n.onset + n.duration);
    }
    if (dropped == notes.size())
        throw std::runtime_error("to_pianoroll: all " + std::to_string(dropped) +
                                 " notes outside pitch range [36,95]");

    const std::int64_t t_frames = (4 * max_end + tq - 1) / tq; // ceil
    RollResult res;
    res.dropped_notes = dropped;
    res.roll.frames = Matrix(static_cast<std::size_t>(t_frames), kPitchCount);

    for (const auto& n : notes) {
        if (n.pitch < kPitchBase || n.pitch >= kPitchBase + kPitchCount) continue;
        const std::int64_t f_first = (4 * n.onset) / tq;
        const std::int64_t f_last = (4 * (n.onset + n.duration) + tq - 1) / tq; // exclusive
        for (std::int64_t f = f_first; f < f_last; ++f)
            res.roll.frames(static_cast<std::size_t>(f), static_cast<std::size_t>(n.pitch - kPitchBase)) = 1.0;
    }
    return res;
}

// Heuristic entry point for files: SMF if it starts with MThd, note list
// otherwise.
inline NoteData parse_auto(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 4 && bytes[0] == 'M' && bytes[1] == 'T' && bytes[2] == 'h' && bytes[3] == 'd')
        return parse_midi(bytes);
    return parse_notelist(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

} // namespace timr::symbolic

#endif // TIMR_SYMBOLIC_HPP
