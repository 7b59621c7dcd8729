"""Source-story and target-problem texts for the qualitative
problem-solving prompts, shipped verbatim as unscored templates.

These are the classic convergence-problem materials (radiation/fortress)
and the children's transfer task (gumballs/genie). export files are plain
text prompts ready to paste into a playground; nothing here is scored.
"""

RADIATION_PROBLEM = (
    "Suppose you were a doctor faced with a patient suffering from a malignant "
    "stomach tumor. The tumor is inoperable, and the patient will die unless it "
    "is destroyed. There is a kind of ray that will destroy the tumor if the "
    "rays reach it at a high intensity. But unfortunately, such high-intensity "
    "rays will also destroy the healthy tissue they pass through on the way to "
    "the tumor. At lower intensities the rays will not damage the healthy "
    "tissue, but neither will they remove the tumor. How can the doctor use "
    "rays to destroy the tumor, while at the same time sparing the healthy "
    "tissue?"
)

GENERAL_STORY = (
    "An evil dictator controlled a fortress situated in the center of a small "
    "country. Many roads radiated out from the fortress like spokes on a wheel. "
    "A general raised an army at the border, vowing to capture the fortress and "
    "overthrow the dictator. The general was about to send his entire army down "
    "one road to capture the fortress, when he learned that the dictator had "
    "mined each road so that although small groups could still pass, a large "
    "army would set off an explosion. The general then had a clever idea: he "
    "divided his army into small groups and dispatched each group to the head "
    "of a different road. Upon his signal, each group charged down a different "
    "road. All the groups passed safely to the fortress, where the entire army "
    "attacked the fortress in full strength. In this way the general captured "
    "the fortress and overthrew the dictator."
)

LIGHTBULB_LASER_STORY = (
    "In a physics lab at a major university, a very expensive lightbulb which "
    "would emit precisely controlled quantities of light was being used in some "
    "experiments. Ruth was the research assistant responsible for operating the "
    "sensitive lightbulb. One morning she came into the lab and found to her "
    "dismay that the lightbulb no longer worked. She realized that she had "
    "forgotten to turn it off the previous night. As a result the lightbulb "
    "overheated, and the filament inside the bulb had broken into two parts. "
    "The surrounding glass bulb was completely sealed, so there was no way to "
    "open it. Ruth knew that the lightbulb could be repaired if a brief, "
    "high-intensity laser beam could be used to fuse the two parts of the "
    "filament into one. Furthermore, the lab had the necessary equipment to do "
    "the job. However, a high-intensity laser beam would also break the fragile "
    "glass surrounding the filament. At lower intensities the laser would not "
    "break the glass, but neither would it fuse the filament. So it seemed that "
    "the lightbulb could not be repaired, and a costly replacement would be "
    "required. Ruth was about to give up when she had an idea. She placed "
    "several lasers in a circle around the lightbulb, and administered "
    "low-intensity laser beams from several directions all at once. The beams "
    "all converged on the filament, where their combined effect was enough to "
    "fuse it. Since each spot on the surrounding glass received only a "
    "low-intensity beam from one laser, the glass was left intact. Ruth was "
    "greatly relieved that the lightbulb was repaired, and she then went on to "
    "successfully complete the experiment."
)

LIGHTBULB_ULTRASOUND_STORY = (
    "In a physics lab at a major university, a very expensive lightbulb which "
    "would emit precisely controlled quantities of light was being used in some "
    "experiments. Ruth was the research assistant responsible for operating the "
    "sensitive lightbulb. One morning she came into the lab and found to her "
    "dismay that the lightbulb no longer worked. She realized that she had "
    "forgotten to turn it off the previous night. As a result the lightbulb "
    "overheated, and the two wires in the filament inside the bulb fused "
    "together. The surrounding glass bulb was completely sealed, so there was "
    "no way to open it. Ruth knew that the lightbulb could be repaired if a "
    "brief, high-intensity ultrasound wave could be used to jar apart the fused "
    "parts. Furthermore, the lab had the necessary equipment to do the job. "
    "However, a high-intensity ultrasound wave would also break the fragile "
    "glass surrounding the filament. At lower intensities the ultrasound wave "
    "would not break the glass, but neither would it jar apart the fused parts. "
    "So it seemed that the lightbulb could not be repaired, and a costly "
    "replacement would be required. Ruth was about to give up when she had an "
    "idea. She placed several ultrasound machines in a circle around the "
    "lightbulb, and administered low-intensity ultrasound waves from several "
    "directions all at once. The waves all converged on the filament, where "
    "their combined effect was enough to jar apart the fused parts. Since each "
    "spot on the surrounding glass received only a low-intensity wave from one "
    "ultrasound machine, the glass was left intact. Ruth was greatly relieved "
    "that the lightbulb was repaired, and she then went on to successfully "
    "complete the experiment."
)

WINE_MERCHANTS_STORY = (
    "One day a rich man found that his wine cellar was empty. So he sent out "
    "messengers to announce a generous offer. The first person to bring the "
    "rich man a barrel of wine would be given a brick of solid gold. However, "
    "the offer would expire at sundown. Two wine merchants heard the news. Each "
    "had a horse-drawn cart loaded with large barrels of wine. They both set "
    "out for the duke’s palace at once. An hour before sundown they came "
    "to a place where the bridge had been washed out by a raging river. The "
    "first merchant drove his horses and cart into the flood in a desperate "
    "attempt to reach the other side. But the horses were already exhausted and "
    "could not fight the current. The cart overturned, and the horses, wine, "
    "and driver were washed away. The second merchant tried a different tactic. "
    "He poured the wine out of all but one of his barrels, and lashed them "
    "together to form a raft; then he loaded the one full barrel, a horse, and "
    "himself on top. He set the raft adrift and floated downstream. In a few "
    "minutes the raft came to rest on the shore in front of the town where the "
    "rich man lived. The merchant disembarked, loaded the wine barrel on the "
    "horse, and led it to the rich man’s house. He arrived just as the sun "
    "was setting, and collected the gold brick as a reward for his efforts."
)

IDENTICAL_TWINS_STORY = (
    "Once there were identical twins who were continually playing pranks on "
    "their family, friends, and teachers. The annual school picnic was always a "
    "big event for the twins. There were races and other athletic events in "
    "which the twins won lots of prizes. One year a new student arrived who was "
    "a star runner. The twins wanted to win the main event: the 2-mile race "
    "through the woods behind the school. So they secretly devised a plan which "
    "would enable them to outdo the newcomer. The day of the race arrived. Each "
    "runner was to pick his own path through the woods to a clearing, where a "
    "teacher stood posted to determine the winner. One twin entered the race, "
    "while the other excused himself on the grounds that he had hurt his leg in "
    "an earlier broadjumping event. The race began and the students rushed into "
    "the woods. The twin rushed into the woods and waited until the others had "
    "passed out of sight. Then he went back to the school using a path hidden "
    "from the picnic area. Shortly after, the other twin, who had been hiding "
    "behind a rock near the finish line of the race, burst out and ran into the "
    "clearing ahead of the other runners. The teacher named him the winner and "
    "marveled at the speed of his running. Next year the twins switched places "
    "and thereafter maintained their status on this event."
)

GUMBALL_PROBLEM = (
    "You are seated in front of a table. Two bowls are on the table, one within "
    "your reach and one farther away. The closer bowl contains a number of "
    "small gumballs, and the farther one is empty. Also on the table are an "
    "aluminum walking cane, a large rectangular sheet of heavy paper "
    "(posterboard), a hollow cardboard tube long enough to reach the farther "
    "bowl, scissors, string, tape, paper clips, and rubber bands. Using the "
    "materials provided, how can you transfer the balls from the filled to the "
    "empty bowl without leaving your seat?"
)

MAGIC_STAFF_STORY = (
    "Once upon a time there lived a magical genie. He was a very old, wise, and "
    "rich genie indeed. One day while he was polishing his home, which was "
    "actually a bottle, he decided he would like to find an even bigger and "
    "better home to live in. So he began searching far and wide for another "
    "bottle. Finally he found the perfect home. It was larger, prettier, and "
    "not too far away from his old bottle. The genie was very excited and began "
    "moving his belongings right away. But now the genie had a problem. He had "
    "a great many beautiful and very precious jewels in his old home. He had to "
    "somehow get all the jewels from his old bottle to the new bottle without "
    "dropping or losing a single jewel.\n"
    "\n"
    "After thinking a bit, the genie came up with a wonderful idea. He began "
    "searching for his magic staff, or wand. He then commanded his staff to "
    "stretch itself from his old home to his new home. Next, the genie tugged "
    "and pulled on his magical staff until at last he pulled the new bottle "
    "right up next to his old bottle. At once, the genie began gathering his "
    "jewels together in his old home and simply dropped them carefully into his "
    "new home right next to him. When all his jewels were safely tucked away in "
    "his new home, the genie settled in happily. He invited his friend to come "
    "in and admire his new home. I’m sure you can still find the genie "
    "sitting in his new bigger and better bottle with all his jewels and "
    "smiling contentedly even today!"
)

MAGIC_CARPET_STORY = (
    "Once upon a time there lived a magical genie. He was a very old, wise, and "
    "rich genie indeed. One day while he was polishing his home, which was "
    "actually a bottle, he decided he would like to find an even bigger and "
    "better home to live in. So he began searching far and wide for another "
    "bottle. Finally he found the perfect home. It was larger, prettier, and "
    "not too far away from his old bottle. The genie was very excited and began "
    "moving his belongings right away. But now the genie had a problem. He had "
    "a great many beautiful and very precious jewels in his old home. He had to "
    "somehow get all the jewels from his old bottle to the new bottle without "
    "dropping or losing a single jewel.\n"
    "\n"
    "After thinking a bit, the genie came up with a wonderful idea. He searched "
    "for his magic carpet. Then he commanded it to roll itself up into a long "
    "hollow tube. Next the genie commanded his flying carpet to place one end "
    "at his old home and the other end at his new home so that it formed a sort "
    "of hollow bridge between the two bottles. Then, the genie very carefully "
    "took one jewel from inside his old home and placed it into the opening of "
    "his carpet. At once, the jewel began tumbling and rolling through the "
    "carpet tube until it reached his new home and plopped safely inside. The "
    "genie grinned happily and began rolling all his jewels through the carpet "
    "into his new home. In fact, I’m sure you can still find him sitting "
    "in his new, bigger and better bottle with all his jewels and smiling "
    "contentedly even today!"
)

HINT_SOLUTION_LINE = (
    "Solution (in solving this problem you may find that one of the stories "
    "you read before will give you a hint for a solution of this problem):"
)


def _target_only(problem: str) -> str:
    return f"Target problem:\n\n{problem}\n\nSolution:"


def _with_source(story: str, problem: str) -> str:
    return f"Source story:\n\n{story}\n\nTarget problem:\n\n{problem}\n\nSolution:"


def _with_distractors(problem: str, final_line: str) -> str:
    return (
        f"Story #1 -- The Wine Merchants:\n\n{WINE_MERCHANTS_STORY}\n\n"
        f"Story #2 -- The General:\n\n{GENERAL_STORY}\n\n"
        f"Story #3 -- The Identical Twins:\n\n{IDENTICAL_TWINS_STORY}\n\n"
        f"Target problem:\n\n{problem}\n\n{final_line}"
    )


PROBLEM_SOLVING_PROMPTS: dict[str, str] = {
    "radiation_problem_alone": _target_only(RADIATION_PROBLEM),
    "radiation_after_general_story": _with_source(GENERAL_STORY, RADIATION_PROBLEM),
    "radiation_after_lightbulb_laser_story": _with_source(LIGHTBULB_LASER_STORY, RADIATION_PROBLEM),
    "radiation_after_lightbulb_ultrasound_story": _with_source(
        LIGHTBULB_ULTRASOUND_STORY, RADIATION_PROBLEM
    ),
    "radiation_with_distractor_stories": _with_distractors(RADIATION_PROBLEM, "Solution:"),
    "radiation_with_distractor_stories_hint": _with_distractors(
        RADIATION_PROBLEM, HINT_SOLUTION_LINE
    ),
    "gumball_problem_alone": _target_only(GUMBALL_PROBLEM),
    "gumball_after_magic_staff_story": _with_source(MAGIC_STAFF_STORY, GUMBALL_PROBLEM),
    "gumball_after_magic_carpet_story": _with_source(MAGIC_CARPET_STORY, GUMBALL_PROBLEM),
}
