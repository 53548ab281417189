import os
import sys

# Add the package root directory to the sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../')))

from dotenv import load_dotenv
load_dotenv()  # Load environment variables from .env file

from tradenet import visuals
from tradenet.analysis.dynamics import Dynamics
from tradenet.scenario import Scenario

def main():
    scenario = Scenario.from_file("fig7")
    dynamics = Dynamics(scenario.market)

    # Plot phi Along a Seeded Offer Run
    # ---------------------------------
    spec = scenario.run("random-offers")
    run = dynamics.run_offer_dynamics(spec.config, scenario.scheduler(spec))
    print(f"Terminated after {run.rounds} rounds")
    visuals.plot_potential(run.trace)
    # ---------------------------------

if __name__ == "__main__":
    main()
