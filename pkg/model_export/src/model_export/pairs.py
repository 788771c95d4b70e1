"""Fixture sentence pairs for source-vs-export agreement checks.

Fifty (premise, hypothesis) pairs mixing clear entailments, contradictions,
and neutral pairs, kept short so every pair fits any plausible token limit.
The first pair is the identity sanity pair used by the quick post-export
check.
"""

SANITY_PAIR = ("A man is sleeping.", "A man is sleeping.")

DEFAULT_PAIRS: tuple[tuple[str, str], ...] = (
    SANITY_PAIR,
    ("A man is sleeping.", "A person is awake."),
    ("A man is sleeping.", "Someone is resting."),
    ("Two dogs run across the field.", "Animals are moving outdoors."),
    ("Two dogs run across the field.", "The dogs are asleep."),
    ("Two dogs run across the field.", "The field is muddy."),
    ("A woman reads a book on the train.", "A passenger is reading."),
    ("A woman reads a book on the train.", "The train is empty."),
    ("A woman reads a book on the train.", "She is watching a film."),
    ("The chef chops onions in the kitchen.", "Food is being prepared."),
    ("The chef chops onions in the kitchen.", "The kitchen is closed."),
    ("Children play football in the park.", "Kids are playing a game."),
    ("Children play football in the park.", "The park is deserted."),
    ("Children play football in the park.", "It is raining heavily."),
    ("A crowd marched through the city center.", "People gathered in the streets."),
    ("A crowd marched through the city center.", "The streets were empty."),
    ("Police arrested two demonstrators.", "Officers detained people."),
    ("Police arrested two demonstrators.", "Nobody was detained."),
    ("Police arrested two demonstrators.", "The weather was cold."),
    ("The factory closed last year.", "The factory is still operating."),
    ("The factory closed last year.", "The plant shut down."),
    ("He bought fresh bread this morning.", "He purchased food today."),
    ("He bought fresh bread this morning.", "He sold his car."),
    ("The river flooded the village.", "Water covered the houses."),
    ("The river flooded the village.", "The village stayed dry."),
    ("A violinist performed on stage.", "Music was played live."),
    ("A violinist performed on stage.", "The concert was cancelled."),
    ("The committee approved the budget.", "The budget was accepted."),
    ("The committee approved the budget.", "The budget was rejected."),
    ("The committee approved the budget.", "The meeting ran late."),
    ("Farmers harvested the wheat in August.", "Crops were collected in summer."),
    ("Farmers harvested the wheat in August.", "The wheat was never harvested."),
    ("A cat sits on the warm windowsill.", "An animal is indoors."),
    ("A cat sits on the warm windowsill.", "The cat is swimming."),
    ("The team won the final match.", "The team lost the final."),
    ("The team won the final match.", "The team was victorious."),
    ("She teaches mathematics at a school.", "She works as a teacher."),
    ("She teaches mathematics at a school.", "She has never taught."),
    ("The store opens at nine every day.", "Customers can enter in the morning."),
    ("The store opens at nine every day.", "The store never opens."),
    ("An old bridge crosses the narrow river.", "There is a bridge over the water."),
    ("An old bridge crosses the narrow river.", "The bridge collapsed years ago."),
    ("Workers repaired the broken road overnight.", "The road was fixed."),
    ("Workers repaired the broken road overnight.", "The road remains broken."),
    ("The museum exhibits ancient pottery.", "Old artifacts are on display."),
    ("The museum exhibits ancient pottery.", "The museum shows only paintings."),
    ("A storm knocked out power in the region.", "Electricity was interrupted."),
    ("A storm knocked out power in the region.", "The power stayed on."),
    ("Volunteers cleaned the beach on Sunday.", "People removed litter from the shore."),
    ("Volunteers cleaned the beach on Sunday.", "The beach was left untouched."),
)
