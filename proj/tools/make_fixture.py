#!/usr/bin/env python3
"""Generates the synthetic mini dataset under fixtures/mini.

The output is deterministic for a given --seed. Cell values are drawn from
hand-written pools per label; no cell spells out a label name.
"""

import argparse
import csv
import io
import json
import random
import re
from pathlib import Path

LABELS = [
    "MusicRecordingName", "Duration", "ArtistName", "AlbumName",
    "RestaurantName", "PriceRange", "AddressRegion", "Country", "Telephone",
    "PaymentAccepted", "PostalCode", "Coordinate", "DayOfWeek", "Time",
    "RestaurantDescription", "Review",
    "HotelName", "FaxNumber", "AddressLocality", "email",
    "LocationFeatureSpecification", "HotelDescription", "Rating", "Photograph",
    "EventName", "Date", "DateTime", "EventStatusType", "EventDescription",
    "EventAttendanceModeEnumeration", "Organization", "Currency",
]

DOMAINS = [
    {"name": "Music Recording", "aliases": ["music"],
     "labels": ["MusicRecordingName", "Duration", "ArtistName", "AlbumName"]},
    {"name": "Hotels", "aliases": ["hotels", "hotel"],
     "labels": ["HotelName", "PriceRange", "Telephone", "FaxNumber", "Country", "Time",
                "PostalCode", "AddressLocality", "email", "LocationFeatureSpecification",
                "HotelDescription", "Review", "Rating", "PaymentAccepted", "Photograph"]},
    {"name": "Restaurants", "aliases": ["restaurants", "restaurant"],
     "labels": ["RestaurantName", "PriceRange", "AddressRegion", "Country", "Telephone",
                "PaymentAccepted", "PostalCode", "Coordinate", "DayOfWeek", "Time",
                "RestaurantDescription", "Review"]},
    {"name": "Events", "aliases": ["events", "event"],
     "labels": ["EventName", "Date", "DateTime", "EventStatusType", "EventDescription",
                "EventAttendanceModeEnumeration", "Organization", "Currency", "Telephone"]},
]

# One synonym per label, in the order the synonym oracle will prefer.
SYNONYMS = [
    ("Check-in Time", "Time"),
    ("Amenities", "LocationFeatureSpecification"),
    ("Song Title", "MusicRecordingName"),
    ("Track Length", "Duration"),
    ("Performer", "ArtistName"),
    ("Record Title", "AlbumName"),
    ("Eatery", "RestaurantName"),
    ("Cost Level", "PriceRange"),
    ("State or Province", "AddressRegion"),
    ("Nation", "Country"),
    ("Phone Number", "Telephone"),
    ("Payment Options", "PaymentAccepted"),
    ("Zip Code", "PostalCode"),
    ("Geo Location", "Coordinate"),
    ("Opening Days", "DayOfWeek"),
    ("Restaurant Summary", "RestaurantDescription"),
    ("Customer Feedback", "Review"),
    ("Lodging", "HotelName"),
    ("Fax", "FaxNumber"),
    ("City", "AddressLocality"),
    ("E-mail Address", "email"),
    ("Hotel Summary", "HotelDescription"),
    ("Star Score", "Rating"),
    ("Image URL", "Photograph"),
    ("Event Title", "EventName"),
    ("Calendar Day", "Date"),
    ("Timestamp", "DateTime"),
    ("Event Status", "EventStatusType"),
    ("Event Summary", "EventDescription"),
    ("Attendance Mode", "EventAttendanceModeEnumeration"),
    ("Organizer", "Organization"),
    ("Currency Code", "Currency"),
]

FIG1_ROWS = [
    ["Friends Pizza", "2525", "Cash Visa MasterCard", "7:30 AM"],
    ["Luigi's Corner Kitchen", "$$", "Cash Visa", "11:00 AM"],
    ["Golden Dragon Noodle Bar", "$", "Cash", "12:00 PM"],
    ["The Olive Branch Bistro", "$$$", "Visa MasterCard AmEx", "5:30 PM"],
    ["Harbor Fish Shack", "$$", "Cash MasterCard", "10:00 AM"],
]
FIG1_LABELS = ["RestaurantName", "PriceRange", "PaymentAccepted", "Time"]

ADJ = ["Golden", "Silver", "Blue", "Quiet", "Wild", "Electric", "Velvet", "Crimson", "Lonely",
       "Bright", "Hidden", "Northern", "Broken", "Endless", "Sweet", "Midnight"]
NOUN = ["River", "Highway", "Garden", "Summer", "Letters", "Horizon", "Echoes", "Mountain",
        "Streetlights", "Harbor", "Dreams", "Ocean", "Canyon", "Fire", "Window", "Station"]
FIRST = ["Anna", "Marco", "Lena", "James", "Sofia", "Daniel", "Mia", "Lucas", "Nora", "Ethan",
         "Clara", "Omar", "Julia", "Felix", "Ava", "Leo"]
LAST = ["Fischer", "Rossi", "Novak", "Carter", "Lindqvist", "Moreau", "Okafor", "Tanaka",
        "Silva", "Brennan", "Kowalski", "Haddad", "Jensen", "Alvarez"]
CITIES = [("San Francisco", "CA", "US", "94103", "37.7749, -122.4194", "+1 415"),
          ("Berlin", "Berlin", "Germany", "10115", "52.5200, 13.4050", "+49 30"),
          ("Lyon", "Auvergne-Rhone-Alpes", "France", "69002", "45.7640, 4.8357", "+33 4"),
          ("Austin", "TX", "US", "73301", "30.2672, -97.7431", "+1 512"),
          ("Munich", "Bavaria", "Germany", "80331", "48.1351, 11.5820", "+49 89"),
          ("Toronto", "Ontario", "Canada", "M5H 2N2", "43.6532, -79.3832", "+1 416"),
          ("Florence", "Tuscany", "Italy", "50122", "43.7696, 11.2558", "+39 055"),
          ("Portland", "OR", "US", "97205", "45.5152, -122.6784", "+1 503"),
          ("Vienna", "Vienna", "Austria", "1010", "48.2082, 16.3738", "+43 1"),
          ("Barcelona", "Catalonia", "Spain", "08002", "41.3874, 2.1686", "+34 93")]
FOODS = ["Pizza", "Noodle Bar", "Grill", "Bistro", "Taqueria", "Sushi House", "Kitchen",
         "Trattoria", "Smokehouse", "Dumpling Hall", "Cantina", "Brasserie"]
HOTEL_WORDS = ["Park", "Plaza", "Grand", "Harbor", "Garden", "Royal", "Riverside", "Alpine",
               "Central", "Seaside", "Old Town", "Lakeview"]
EVENT_KINDS = ["Jazz Festival", "Book Fair", "Food Truck Night", "Film Screening",
               "Charity Run", "Wine Tasting", "Comedy Night", "Poetry Slam", "Tech Meetup",
               "Street Market", "Choir Concert", "Art Walk"]

DISHES = ["wood-fired pizza", "hand-pulled noodles", "slow-smoked brisket", "fresh pasta",
          "grilled octopus", "vegetable curry", "crispy dumplings", "seasonal salads",
          "homemade tiramisu", "street tacos"]
VIBES = ["a cozy family-run dining room", "a lively open kitchen", "a sunny terrace",
         "a relaxed neighborhood atmosphere", "candle-lit tables", "a long wooden bar"]
REVIEW_OPENERS = ["Absolutely loved it.", "Solid spot for a quick lunch.",
                  "A bit pricey but worth it.", "Service was slow on a busy Friday.",
                  "Came back three times in one week.", "Friendly staff and big portions."]
REVIEW_BODIES = ["The {dish} were the highlight and the staff remembered our names.",
                 "We waited twenty minutes for a table, then the {dish} made up for it.",
                 "Great value, the {dish} came out hot and the desserts were generous.",
                 "Our room overlooked the square and the breakfast buffet was excellent.",
                 "Beds were comfortable, the lobby was noisy late at night.",
                 "Staff helped us book tickets and recommended a great place for {dish}."]
HOTEL_FEATURES = ["Free WiFi", "Outdoor pool", "Parking garage", "Fitness center", "Spa",
                  "Airport shuttle", "Pets allowed", "Rooftop bar", "24-hour front desk",
                  "Air conditioning", "Family rooms", "Sauna"]
EVENT_TOPICS = ["local bands and food stalls", "readings by regional authors",
                "short films from student directors", "tastings from small vineyards",
                "workshops for beginners and experts", "a guided walk through the old quarter",
                "live music on two stages", "talks from open source maintainers"]
ORGS = ["City Arts Council", "Riverside Community Trust", "Northside Cultural Club",
        "Friends of the Library", "Harbor District Association", "Open Stage Collective",
        "Downtown Business Alliance", "Green Valley Foundation"]


def pick(rng, items):
    return items[rng.randrange(len(items))]


class TableMaker:
    """Draws one coherent row per call: a place, then the values that go with it."""

    def __init__(self, rng):
        self.rng = rng

    def music_row(self):
        r = self.rng
        minutes, seconds = r.randint(2, 6), r.randint(0, 59)
        return {
            "MusicRecordingName": f"{pick(r, ADJ)} {pick(r, NOUN)}",
            "Duration": f"PT{minutes}M{seconds:02d}S",
            "ArtistName": f"{pick(r, FIRST)} {pick(r, LAST)}" if r.random() < 0.5
            else f"The {pick(r, ADJ)} {pick(r, NOUN)}",
            "AlbumName": f"{pick(r, NOUN)} of the {pick(r, ADJ)} {pick(r, NOUN)}",
        }

    def place(self):
        return pick(self.rng, CITIES)

    def phone(self, prefix):
        r = self.rng
        return f"{prefix} {r.randint(200, 999)}-{r.randint(1000, 9999)}"

    def restaurant_row(self):
        r = self.rng
        city, region, country, postal, coord, prefix = self.place()
        name = f"{pick(r, LAST)}'s {pick(r, FOODS)}" if r.random() < 0.5 \
            else f"{pick(r, ADJ)} {pick(r, FOODS)}"
        dish = pick(r, DISHES)
        hour = r.randint(6, 12)
        return {
            "RestaurantName": name,
            "PriceRange": pick(r, ["$", "$$", "$$$", "$$$$", "$10-$25", "$25-$50"]),
            "AddressRegion": region,
            "Country": country,
            "Telephone": self.phone(prefix),
            "PaymentAccepted": pick(r, ["Cash Visa MasterCard", "Cash", "Visa MasterCard AmEx",
                                       "Cash, Credit Card, Apple Pay", "Debit Card"]),
            "PostalCode": postal,
            "Coordinate": coord,
            "DayOfWeek": pick(r, ["Monday, Tuesday, Wednesday, Thursday, Friday",
                                 "Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday",
                                 "Saturday, Sunday", "Mo-Fr", "Mo-Su"]),
            "Time": f"{hour}:{pick(r, ['00', '30'])} {'AM' if hour < 12 else 'PM'}",
            "RestaurantDescription": f"{name} serves {dish} and {pick(r, DISHES)} in "
                                     f"{pick(r, VIBES)} near the center of {city}. "
                                     f"Reservations are recommended on weekends.",
            "Review": f"{pick(r, REVIEW_OPENERS)} " + pick(r, REVIEW_BODIES).format(dish=dish),
        }

    def hotel_row(self):
        r = self.rng
        city, region, country, postal, coord, prefix = self.place()
        word = pick(r, HOTEL_WORDS)
        name = f"{word} Hotel {city}" if r.random() < 0.5 else f"Hotel {pick(r, LAST)} {word}"
        slug = re.sub(r"[^a-z]+", "", name.lower())[:18]
        features = r.sample(HOTEL_FEATURES, r.randint(2, 4))
        return {
            "HotelName": name,
            "PriceRange": pick(r, ["$$", "$$$", "EUR 90-150", "$120-$260", "$$$$"]),
            "Telephone": self.phone(prefix),
            "FaxNumber": self.phone(prefix),
            "Country": country,
            "Time": f"{r.randint(13, 16)}:00",
            "PostalCode": postal,
            "AddressLocality": city,
            "email": f"{pick(r, ['info', 'stay', 'reservations', 'frontdesk'])}@{slug}.com",
            "LocationFeatureSpecification": ", ".join(features),
            "HotelDescription": f"{name} offers {r.randint(20, 240)} rooms a short walk from "
                                f"the old town of {city}, with {features[0].lower()} and "
                                f"{features[1].lower()} for every guest.",
            "Review": f"{pick(r, REVIEW_OPENERS)} " + pick(r, REVIEW_BODIES).format(
                dish=pick(r, DISHES)),
            "Rating": f"{r.randint(30, 50) / 10:.1f}",
            "PaymentAccepted": pick(r, ["Cash, Visa, MasterCard", "Visa MasterCard AmEx",
                                       "Credit Card", "Cash Debit Card"]),
            "Photograph": f"https://images.example.org/{slug}/{r.randint(1, 40):02d}.jpg",
        }

    def event_row(self):
        r = self.rng
        city, region, country, postal, coord, prefix = self.place()
        kind = pick(r, EVENT_KINDS)
        name = f"{city} {kind} {r.choice([2022, 2023, 2024])}" if r.random() < 0.5 \
            else f"{pick(r, ADJ)} {kind}"
        month, day = r.randint(1, 12), r.randint(1, 28)
        hour = r.randint(10, 21)
        return {
            "EventName": name,
            "Date": f"2023-{month:02d}-{day:02d}",
            "DateTime": f"2023-{month:02d}-{day:02d}T{hour:02d}:{pick(r, ['00', '30'])}:00",
            "EventStatusType": pick(r, ["EventScheduled", "EventScheduled", "EventCancelled",
                                       "EventPostponed", "EventRescheduled", "EventMovedOnline"]),
            "EventDescription": f"An evening of {pick(r, EVENT_TOPICS)} in {city}. "
                                f"Doors open one hour early and tickets are limited.",
            "EventAttendanceModeEnumeration": pick(r, ["OfflineEventAttendanceMode",
                                                      "OfflineEventAttendanceMode",
                                                      "OnlineEventAttendanceMode",
                                                      "MixedEventAttendanceMode"]),
            "Organization": pick(r, ORGS),
            "Currency": pick(r, ["USD", "EUR", "GBP", "CAD", "CHF"]),
            "Telephone": self.phone(prefix),
        }

    def row(self, domain):
        return {
            "Music Recording": self.music_row,
            "Hotels": self.hotel_row,
            "Restaurants": self.restaurant_row,
            "Events": self.event_row,
        }[domain]()


def make_table(rng, maker, domain, n_cols, n_rows):
    labels = next(d["labels"] for d in DOMAINS if d["name"] == domain)
    chosen = [labels[0]] + rng.sample(labels[1:], min(n_cols, len(labels)) - 1)
    rng.shuffle(chosen)
    rows = []
    for _ in range(n_rows):
        values = maker.row(domain)
        row = [values[label] for label in chosen]
        # Sparse cells occur in real web tables.
        if rng.random() < 0.15:
            row[rng.randrange(len(row))] = ""
        rows.append(row)
    return chosen, rows


def check_cells(tables):
    patterns = [re.compile(r"\b" + re.escape(label) + r"\b", re.IGNORECASE) for label in LABELS]
    for table_id, _, rows, _, _ in tables:
        for row in rows:
            for cell in row:
                for p in patterns:
                    if p.search(cell):
                        raise SystemExit(f"{table_id}: cell {cell!r} names a label")


def csv_text(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def write_split(root, split, tables):
    split_dir = root / split
    (split_dir / "tables").mkdir(parents=True, exist_ok=True)
    manifest = {"split": split, "tables": []}
    annotations = [["table_id", "column_index", "label"]]
    domains = [["table_id", "domain"]]
    for table_id, labels, rows, domain, unannotated in tables:
        manifest["tables"].append({"table_id": table_id, "file": f"tables/{table_id}.csv",
                                   "n_rows": len(rows), "n_columns": len(labels)})
        (split_dir / "tables" / f"{table_id}.csv").write_text(csv_text(rows), encoding="utf-8")
        for i, label in enumerate(labels):
            if i not in unannotated:
                annotations.append([table_id, str(i), label])
        domains.append([table_id, domain])
    (split_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                             encoding="utf-8")
    (split_dir / "annotations.csv").write_text(csv_text(annotations), encoding="utf-8")
    (split_dir / "domains_gold.csv").write_text(csv_text(domains), encoding="utf-8")


def write_schema(root):
    schema = root / "schema"
    schema.mkdir(parents=True, exist_ok=True)
    (schema / "labels.json").write_text(json.dumps({"labels": LABELS}, indent=2) + "\n",
                                        encoding="utf-8")
    (schema / "domains.json").write_text(json.dumps({"domains": DOMAINS}, indent=2) + "\n",
                                         encoding="utf-8")
    (schema / "synonyms.json").write_text(json.dumps(dict(SYNONYMS), indent=2) + "\n",
                                          encoding="utf-8")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fixtures/mini")
    parser.add_argument("--seed", type=int, default=20230101)
    parser.add_argument("--train-per-domain", type=int, default=5)
    parser.add_argument("--test-per-domain", type=int, default=3)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    maker = TableMaker(rng)
    slugs = {"Music Recording": "music", "Hotels": "hotels", "Restaurants": "restaurants",
             "Events": "events"}

    splits = {"train": [], "test": []}
    for split, count in (("train", args.train_per_domain), ("test", args.test_per_domain)):
        for d in DOMAINS:
            name = d["name"]
            for i in range(count):
                n_cols = rng.randint(3, 4) if name == "Music Recording" else rng.randint(4, 7)
                labels, rows = make_table(rng, maker, name, n_cols, rng.randint(5, 9))
                unannotated = set()
                # Test tables sometimes leave one column unannotated.
                if split == "test" and i == 1 and len(labels) > 4:
                    unannotated = {len(labels) - 1}
                splits[split].append((f"{split}_{slugs[name]}_{i + 1:02d}", labels, rows, name,
                                      unannotated))

    splits["test"].insert(0, ("restaurants_friends_pizza", FIG1_LABELS, FIG1_ROWS,
                              "Restaurants", set()))
    # Train tables back full-table demonstrations, so every column is labelled.
    for t in splits["train"]:
        assert not t[4]
    check_cells(splits["train"] + splits["test"])

    root = Path(args.out)
    write_schema(root)
    for split, tables in splits.items():
        write_split(root, split, tables)
    for split, tables in splits.items():
        columns = sum(len(t[1]) for t in tables)
        annotated = sum(len(t[1]) - len(t[4]) for t in tables)
        print(f"{split}: {len(tables)} tables, {columns} columns, {annotated} annotated")


if __name__ == "__main__":
    main()
