//! The `env` command: describe or render an environment layout exactly as
//! a run with the same seed would see it.

use anyhow::Result;
use clap::{Args, Subcommand};
use voteq::env::{Corridor, Environment, GridWorld};
use voteq::harness::EnvKind;
use voteq::seeding::seeded_rng;

use crate::common::EnvFlags;

#[derive(Args, Debug)]
pub struct EnvCommand {
    #[command(subcommand)]
    pub action: EnvAction,
}

#[derive(Subcommand, Debug)]
pub enum EnvAction {
    /// Print the environment's configuration summary.
    Describe(InspectArgs),
    /// Print the layout: a grid map, or the corridor's hidden action table.
    Render(InspectArgs),
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    #[command(flatten)]
    pub env: EnvFlags,
    /// Layout seed (a run with the same seed draws the same layout).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(cmd: &EnvCommand) -> Result<()> {
    let (args, render) = match &cmd.action {
        EnvAction::Describe(args) => (args, false),
        EnvAction::Render(args) => (args, true),
    };
    let spec = args.env.to_spec()?;
    // The same stream role the experiment runner uses, so what is printed
    // is exactly the layout a run with this seed trains on.
    let mut rng = seeded_rng(args.seed, &format!("layout:{}", spec.name));
    match &spec.kind {
        EnvKind::Corridor(config) => {
            let env = Corridor::new(config.clone(), &mut rng)?;
            if render {
                // Bare machine-friendly table; `describe` has the prose view.
                println!("state left right");
                for state in 0..config.state_count {
                    println!(
                        "{state} {} {}",
                        env.left_action(state),
                        env.right_action(state)
                    );
                }
            } else {
                println!("{}", env.describe());
            }
        }
        EnvKind::Grid(config) => {
            let env = GridWorld::new(config.clone(), &mut rng)?;
            if render {
                print!("{}", env.render());
            } else {
                println!("{}", env.describe());
            }
        }
    }
    Ok(())
}
